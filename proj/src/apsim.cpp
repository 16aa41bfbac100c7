#include "sharp/apsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "sharp/error.hpp"
#include "sharp/parallel.hpp"
#include "sharp/stats.hpp"

namespace sharp {

namespace {

// Work below this is treated as done (absolute, in time units).
constexpr double kWorkEpsilon = 1e-9;

// Retries when rescaled densities overflow the per-stream cap.
constexpr int kMaxStreamDraws = 10'000;

} // namespace

// ---------------------------------------------------------------------------
// SyntheticUtilization

void SyntheticUtilization::add(double arrival, double abs_deadline, double contribution)
{
	advance(arrival);
	heap_.push({abs_deadline, contribution});
	value_ += contribution;
}

template <typename Pred>
std::size_t SyntheticUtilization::drop_while(Pred pred)
{
	std::size_t dropped = 0;
	while (!heap_.empty() && pred(heap_.top().deadline)) {
		value_ -= heap_.top().contribution;
		heap_.pop();
		++dropped;
	}
	if (heap_.empty())
		value_ = 0.0; // shed accumulated rounding
	return dropped;
}

std::size_t SyntheticUtilization::advance(double t)
{
	return drop_while([t](double d) { return d < t; });
}

std::size_t SyntheticUtilization::expire_through(double t)
{
	return drop_while([t](double d) { return d <= t; });
}

std::optional<double> SyntheticUtilization::next_expiry() const
{
	if (heap_.empty())
		return std::nullopt;
	return heap_.top().deadline;
}

double SyntheticUtilization::recompute() const
{
	auto copy = heap_;
	double sum = 0.0;
	while (!copy.empty()) {
		sum += copy.top().contribution;
		copy.pop();
	}
	return sum;
}

// ---------------------------------------------------------------------------
// FixedPriorityCore

bool FixedPriorityCore::ByPriority::operator()(const Ready &a, const Ready &b) const
{
	if (a.key != b.key)
		return a.key < b.key;
	if (a.tie != b.tie)
		return a.tie < b.tie;
	return a.seq < b.seq;
}

FixedPriorityCore::FixedPriorityCore(Observer observer) : observer_(std::move(observer)) {}

void FixedPriorityCore::note_dispatch(double t)
{
	std::optional<std::uint64_t> head;
	if (!ready_.empty())
		head = ready_.begin()->seq;
	if (head == last_running_)
		return;
	if (observer_) {
		if (last_running_) {
			auto it = by_seq_.find(*last_running_);
			if (it != by_seq_.end())
				observer_(t, Event::preempt, *it->second);
		}
		if (head)
			observer_(t, Event::dispatch, *ready_.begin());
	}
	last_running_ = head;
}

void FixedPriorityCore::release(double t, Ready job)
{
	now_ = std::max(now_, t);
	auto [it, inserted] = ready_.insert(job);
	if (!inserted)
		throw ParameterError("duplicate job sequence number");
	by_seq_.emplace(job.seq, it);
	deadlines_.emplace(job.abs_deadline, job.seq);
	note_dispatch(now_);
}

void FixedPriorityCore::advance_to(double t, const RateFn &rate)
{
	while (!ready_.empty() && now_ < t) {
		auto top = ready_.begin();
		double r = rate(*top);
		double finish = now_ + top->remaining / r;
		if (finish <= t || top->remaining <= kWorkEpsilon) {
			busy_ += finish - now_;
			now_ = std::max(now_, finish);
			top->remaining = 0.0;
			Ready done = *top;
			deadlines_.erase(deadlines_.find({done.abs_deadline, done.seq}));
			by_seq_.erase(done.seq);
			ready_.erase(top);
			++completed_;
			last_running_.reset();
			if (observer_)
				observer_(now_, Event::complete, done);
			note_dispatch(now_);
		} else {
			top->remaining -= (t - now_) * r;
			busy_ += t - now_;
			now_ = t;
		}
	}
	now_ = std::max(now_, t);
}

std::vector<FixedPriorityCore::Ready> FixedPriorityCore::expire(double t)
{
	std::vector<Ready> dropped;
	while (!deadlines_.empty() && deadlines_.begin()->first <= t) {
		auto seq = deadlines_.begin()->second;
		deadlines_.erase(deadlines_.begin());
		auto it = by_seq_.find(seq);
		Ready job = *it->second;
		ready_.erase(it->second);
		by_seq_.erase(it);
		if (last_running_ == seq)
			last_running_.reset();
		if (job.remaining <= kWorkEpsilon) {
			// Finished within rounding of its deadline.
			++completed_;
			if (observer_)
				observer_(t, Event::complete, job);
		} else {
			if (observer_)
				observer_(t, Event::miss, job);
			dropped.push_back(job);
		}
	}
	note_dispatch(t);
	return dropped;
}

std::optional<double> FixedPriorityCore::next_completion(const RateFn &rate) const
{
	if (ready_.empty())
		return std::nullopt;
	const auto &top = *ready_.begin();
	return now_ + top.remaining / rate(top);
}

std::optional<double> FixedPriorityCore::earliest_deadline() const
{
	if (deadlines_.empty())
		return std::nullopt;
	return deadlines_.begin()->first;
}

const FixedPriorityCore::Ready *FixedPriorityCore::running() const
{
	return ready_.empty() ? nullptr : &*ready_.begin();
}

// ---------------------------------------------------------------------------
// Workload generation

std::vector<JobStream> gen_streams(const StreamGenConfig &cfg, Rng &rng)
{
	if (cfg.n_streams == 0)
		throw ParameterError("gen_streams: need at least one stream");
	if (!(cfg.max_cd_ratio > 0.0 && cfg.max_cd_ratio <= 1.0))
		throw ParameterError("gen_streams: c/D cap must lie in (0, 1]");
	if (!(cfg.d_min > 0.0 && cfg.d_min <= cfg.d_max))
		throw ParameterError("gen_streams: need 0 < d_min <= d_max");
	if (!(cfg.target_avg_util > 0.0))
		throw ParameterError("gen_streams: target average utilization must be positive "
		                     "(zero would need infinite gaps)");

	std::vector<JobStream> streams(cfg.n_streams);
	double density_sum = 0.0;
	for (std::size_t i = 0; i < cfg.n_streams; ++i) {
		// (0, cap]: 1 - U[0,1) lies in (0, 1].
		double ratio = cfg.max_cd_ratio * (1.0 - rng.uniform(0.0, 1.0));
		double d = std::exp(rng.uniform(std::log(cfg.d_min), std::log(cfg.d_max)));
		if (cfg.d_min == cfg.d_max)
			d = cfg.d_min;
		streams[i] = JobStream{ratio * d, d, 0.0, i};
		density_sum += ratio;
	}
	if (cfg.target_avg_util > density_sum)
		throw ParameterError("gen_streams: target average utilization exceeds the sum of stream "
		                     "densities; add streams or raise the c/D cap");
	double gamma = density_sum / cfg.target_avg_util - 1.0;
	for (auto &s : streams)
		s.mean_gap = gamma * s.rel_deadline;
	return streams;
}

std::vector<Job> release_jobs(const JobStream &stream, double horizon, Rng &rng)
{
	validate(stream);
	if (!(horizon > 0.0))
		throw ParameterError("release_jobs: horizon must be positive");
	std::vector<Job> jobs;
	double a = rng.exponential(stream.mean_gap);
	while (a < horizon) {
		jobs.push_back({stream.id, a, a + stream.rel_deadline, stream.exec_time});
		a = a + stream.rel_deadline + rng.exponential(stream.mean_gap);
	}
	return jobs;
}

std::vector<Job> release_all(std::span<const JobStream> streams, double horizon, Rng &rng)
{
	std::vector<Job> all;
	for (std::size_t i = 0; i < streams.size(); ++i) {
		Rng sub = rng.split(i);
		auto js = release_jobs(streams[i], horizon, sub);
		all.insert(all.end(), js.begin(), js.end());
	}
	std::stable_sort(all.begin(), all.end(), [](const Job &a, const Job &b) {
		if (a.arrival != b.arrival)
			return a.arrival < b.arrival;
		return a.stream_id < b.stream_id;
	});
	return all;
}

// ---------------------------------------------------------------------------
// Simulation

SimReport simulate_jobs(std::span<const JobStream> streams, std::span<const Job> jobs, double horizon,
                        const SimOptions &opts)
{
	if (!(horizon > 0.0))
		throw ParameterError("simulate: horizon must be positive");
	for (const auto &s : streams)
		validate(s);

	std::vector<std::size_t> index_of_id;
	for (std::size_t i = 0; i < streams.size(); ++i) {
		if (streams[i].id >= index_of_id.size())
			index_of_id.resize(streams[i].id + 1, streams.size());
		index_of_id[streams[i].id] = i;
	}
	auto stream_index = [&](std::size_t id) {
		if (id >= index_of_id.size() || index_of_id[id] == streams.size())
			throw ParameterError("simulate: job refers to unknown stream " + std::to_string(id));
		return index_of_id[id];
	};

	SimReport rep;
	rep.per_stream.resize(streams.size());
	const double counted_from = opts.warmup_fraction * horizon;

	auto emit = [&](double t, const char *ev, std::size_t stream, std::uint64_t job, std::string detail) {
		if (opts.trace)
			opts.trace(TraceRecord{t, ev, stream, job, std::move(detail)});
	};
	auto observer = [&](double t, FixedPriorityCore::Event ev, const FixedPriorityCore::Ready &r) {
		bool counted = r.arrival >= counted_from;
		auto &ss = rep.per_stream[r.owner];
		switch (ev) {
		case FixedPriorityCore::Event::dispatch:
			emit(t, "dispatch", streams[r.owner].id, r.seq, "");
			break;
		case FixedPriorityCore::Event::preempt:
			emit(t, "preempt", streams[r.owner].id, r.seq, "");
			break;
		case FixedPriorityCore::Event::complete:
			if (counted) {
				++rep.completed;
				++ss.completed;
				ss.max_response = std::max(ss.max_response, t - r.arrival);
			}
			emit(t, "complete", streams[r.owner].id, r.seq, "response=" + std::to_string(t - r.arrival));
			break;
		case FixedPriorityCore::Event::miss:
			if (counted) {
				++rep.missed;
				++ss.missed;
			}
			emit(t, "miss", streams[r.owner].id, r.seq, "remaining=" + std::to_string(r.remaining));
			break;
		}
	};

	FixedPriorityCore core(observer);
	SyntheticUtilization util;
	const FixedPriorityCore::RateFn unit_rate = [](const FixedPriorityCore::Ready &) { return 1.0; };

	std::size_t next = 0;
	std::uint64_t seq = 0;
	for (;;) {
		double t = horizon;
		bool have_event = false;
		if (next < jobs.size() && jobs[next].arrival < horizon) {
			t = jobs[next].arrival;
			have_event = true;
		}
		if (auto d = core.earliest_deadline(); d && *d <= t) {
			t = *d;
			have_event = true;
		}
		if (!have_event)
			break;

		core.advance_to(t, unit_rate);
		core.expire(t);
		if (opts.stop_on_first_miss && rep.missed > 0) {
			rep.stopped_early = true;
			break;
		}

		while (next < jobs.size() && jobs[next].arrival == t) {
			const Job &j = jobs[next++];
			auto si = stream_index(j.stream_id);
			const auto &s = streams[si];
			util.add(j.arrival, j.abs_deadline, s.density());
			rep.max_synthetic_util = std::max(rep.max_synthetic_util, util.value());

			std::uint64_t id = seq++;
			if (j.arrival >= counted_from) {
				++rep.released;
				++rep.per_stream[si].released;
			}
			emit(t, "release", s.id, id, "deadline=" + std::to_string(j.abs_deadline));
			core.release(t, FixedPriorityCore::Ready{id, s.rel_deadline, s.id, j.abs_deadline, j.arrival,
			                                         j.exec_time, 1.0, si});
		}
	}
	if (!rep.stopped_early)
		core.advance_to(horizon, unit_rate);

	rep.in_flight = rep.released >= rep.completed + rep.missed ? rep.released - rep.completed - rep.missed : 0;
	std::size_t decided = rep.completed + rep.missed;
	rep.miss_fraction = decided ? static_cast<double>(rep.missed) / static_cast<double>(decided) : 0.0;
	return rep;
}

SimReport simulate_dm(std::span<const JobStream> streams, double horizon, Rng &rng, const SimOptions &opts)
{
	auto jobs = release_all(streams, horizon, rng);
	return simulate_jobs(streams, jobs, horizon, opts);
}

void write_trace_header(std::ostream &out)
{
	out << "time,event,stream,job,detail\n";
}

void write_trace_record(std::ostream &out, const TraceRecord &r)
{
	char buf[40];
	std::snprintf(buf, sizeof buf, "%.9g", r.time);
	out << buf << ',' << r.event << ',' << r.stream << ',' << r.job << ',' << r.detail << '\n';
}

// ---------------------------------------------------------------------------
// Threshold sweep over peak synthetic utilization

std::vector<JobStream> gen_streams_with_peak(const SyntheticSweepConfig &cfg, double peak_util, Rng &rng)
{
	if (cfg.n_streams == 0)
		throw ParameterError("synthetic sweep: need at least one stream");
	if (!(peak_util > 0.0))
		throw ParameterError("synthetic sweep: peak utilization must be positive");
	if (peak_util > cfg.max_cd_ratio * static_cast<double>(cfg.n_streams))
		throw ParameterError("synthetic sweep: peak utilization unreachable with this many streams");
	if (!(cfg.gap_factor >= 0.0))
		throw ParameterError("synthetic sweep: gap factor must be non-negative");

	for (int attempt = 0; attempt < kMaxStreamDraws; ++attempt) {
		StreamGenConfig g;
		g.n_streams = cfg.n_streams;
		g.max_cd_ratio = cfg.max_cd_ratio;
		g.d_min = cfg.d_min;
		g.d_max = cfg.d_max;
		g.target_avg_util = 1e-9; // gaps are overwritten below
		auto streams = gen_streams(g, rng);

		double sum = 0.0;
		for (const auto &s : streams)
			sum += s.density();
		double scale = peak_util / sum;
		bool ok = true;
		for (auto &s : streams) {
			s.exec_time *= scale;
			s.mean_gap = cfg.gap_factor * s.rel_deadline;
			if (s.density() > cfg.max_cd_ratio * (1.0 + 1e-12))
				ok = false;
		}
		if (ok)
			return streams;
	}
	throw ParameterError("synthetic sweep: could not draw streams under the c/D cap");
}

ThresholdCurve synthetic_sweep(const SyntheticSweepConfig &cfg, const SweepGrid &grid, std::size_t trials,
                               std::uint64_t seed, unsigned jobs)
{
	if (trials == 0)
		throw ParameterError("synthetic sweep: need at least one trial");
	if (!(cfg.horizon_factor > 0.0))
		throw ParameterError("synthetic sweep: horizon factor must be positive");

	ThresholdCurve c;
	c.n = cfg.n_streams;
	c.generator = "synthetic";
	c.seed = seed;
	c.grid = grid.points();

	for (std::size_t g = 0; g < c.grid.size(); ++g) {
		std::vector<char> ok(trials, 0);
		double peak = c.grid[g];
		parallel_for(trials, jobs, [&](std::size_t t) {
			if (peak == 0.0) {
				ok[t] = 1;
				return;
			}
			Rng rng = Rng::derive(seed, {cfg.n_streams, g, t});
			auto streams = gen_streams_with_peak(cfg, peak, rng);
			double max_d = 0.0;
			for (const auto &s : streams)
				max_d = std::max(max_d, s.rel_deadline);
			SimOptions opts;
			opts.stop_on_first_miss = true;
			auto rep = simulate_dm(streams, cfg.horizon_factor * max_d, rng, opts);
			ok[t] = rep.missed == 0 ? 1 : 0;
		});
		auto successes = static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 1));
		auto mu = wilson_interval(successes, trials);
		c.p_hat.push_back(mu.p_hat);
		c.ci_lo.push_back(mu.lo);
		c.ci_hi.push_back(mu.hi);
		c.trials.push_back(trials);
	}
	return c;
}

} // namespace sharp
