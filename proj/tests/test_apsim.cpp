#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>

#include "sharp/apsim.hpp"
#include "sharp/error.hpp"

using namespace sharp;

namespace {

// Quantum-stepping reference for preemptive deadline monotonic scheduling.
// All arrivals, deadlines and execution times must be multiples of q.
struct Reference {
	std::size_t completed = 0;
	std::size_t missed = 0;
	std::vector<std::size_t> missed_jobs;
};

Reference reference_dm(std::span<const JobStream> streams, std::span<const Job> jobs, double horizon, double q)
{
	struct Live {
		std::size_t idx;
		double rel_deadline;
		std::size_t stream;
		double deadline;
		long left;
	};
	std::vector<Live> live;
	Reference ref;
	std::size_t next = 0;
	long steps = std::lround(horizon / q);
	for (long k = 0; k <= steps; ++k) {
		double t = static_cast<double>(k) * q;
		for (auto it = live.begin(); it != live.end();) {
			if (it->left == 0) {
				++ref.completed;
				it = live.erase(it);
			} else if (it->deadline <= t + 1e-12) {
				++ref.missed;
				ref.missed_jobs.push_back(it->idx);
				it = live.erase(it);
			} else {
				++it;
			}
		}
		while (next < jobs.size() && jobs[next].arrival <= t + 1e-12 && t < horizon) {
			const auto &j = jobs[next];
			live.push_back({next, streams[j.stream_id].rel_deadline, j.stream_id, j.abs_deadline,
			                std::lround(j.exec_time / q)});
			++next;
		}
		if (k == steps)
			break;
		auto best = std::min_element(live.begin(), live.end(), [](const Live &a, const Live &b) {
			if (a.rel_deadline != b.rel_deadline)
				return a.rel_deadline < b.rel_deadline;
			if (a.stream != b.stream)
				return a.stream < b.stream;
			return a.idx < b.idx;
		});
		if (best != live.end())
			--best->left;
	}
	return ref;
}

// U(t) straight from the definition.
double synthetic_at(std::span<const JobStream> streams, std::span<const Job> jobs, double t)
{
	double u = 0.0;
	for (const auto &j : jobs)
		if (j.arrival <= t && t <= j.abs_deadline)
			u += streams[j.stream_id].density();
	return u;
}

std::vector<JobStream> grid_streams(Rng &rng, std::size_t n)
{
	std::vector<JobStream> s;
	for (std::size_t i = 0; i < n; ++i) {
		double d = static_cast<double>(rng.uniform_int(2, 12));
		double c = 0.5 * static_cast<double>(rng.uniform_int(1, static_cast<std::int64_t>(d)));
		s.push_back({c, d, 3.0, i});
	}
	return s;
}

// Arrivals snapped to integers so everything lives on the half-unit grid.
std::vector<Job> grid_jobs(std::span<const JobStream> streams, double horizon, Rng &rng)
{
	std::vector<Job> jobs;
	for (const auto &s : streams) {
		double a = std::floor(rng.exponential(s.mean_gap));
		while (a < horizon) {
			jobs.push_back({s.id, a, a + s.rel_deadline, s.exec_time});
			a += s.rel_deadline + std::floor(rng.exponential(s.mean_gap));
		}
	}
	std::stable_sort(jobs.begin(), jobs.end(), [](const Job &a, const Job &b) {
		if (a.arrival != b.arrival)
			return a.arrival < b.arrival;
		return a.stream_id < b.stream_id;
	});
	return jobs;
}

} // namespace

TEST_CASE("[apsim] synthetic utilization over a closed interval")
{
	SyntheticUtilization u;
	u.add(0.0, 10.0, 0.25);
	u.add(2.0, 5.0, 0.5);
	CHECK(u.value() == doctest::Approx(0.75));
	CHECK(u.active() == 2);
	CHECK(*u.next_expiry() == 5.0);

	u.advance(5.0); // deadline 5 still counts at t = 5
	CHECK(u.value() == doctest::Approx(0.75));
	u.advance(5.5);
	CHECK(u.value() == doctest::Approx(0.25));
	CHECK(u.expire_through(10.0) == 1);
	CHECK(u.value() == 0.0);
	CHECK_FALSE(u.next_expiry().has_value());
}

TEST_CASE("[apsim] incremental U(t) matches a recomputation")
{
	Rng rng(4);
	SyntheticUtilization u;
	double t = 0.0;
	for (int k = 0; k < 20000; ++k) {
		t += rng.exponential(1.0);
		u.add(t, t + rng.uniform(1.0, 50.0), rng.uniform(0.0, 0.125));
		CHECK(std::abs(u.value() - u.recompute()) <= 1e-9);
	}
}

TEST_CASE("[apsim] stream generator respects its configuration")
{
	Rng rng(10);
	StreamGenConfig cfg;
	auto s = gen_streams(cfg, rng);
	REQUIRE(s.size() == 32);
	double density = 0.0;
	for (std::size_t i = 0; i < s.size(); ++i) {
		CHECK(s[i].id == i);
		CHECK(s[i].density() > 0.0);
		CHECK(s[i].density() <= 0.125 + 1e-15);
		CHECK(s[i].rel_deadline >= 10.0);
		CHECK(s[i].rel_deadline <= 1000.0);
		density += s[i].density();
	}
	double gamma = s[0].mean_gap / s[0].rel_deadline;
	CHECK(density / (1.0 + gamma) == doctest::Approx(0.5));

	cfg.target_avg_util = 5.0;
	CHECK_THROWS_AS(gen_streams(cfg, rng), ParameterError);
	cfg.target_avg_util = 0.0;
	CHECK_THROWS_AS(gen_streams(cfg, rng), ParameterError);
}

TEST_CASE("[apsim] job releases keep one job per stream in flight")
{
	Rng rng(6);
	JobStream s{1.0, 10.0, 5.0, 3};
	auto jobs = release_jobs(s, 100000.0, rng);
	REQUIRE(jobs.size() > 1000);
	double gap_sum = 0.0;
	for (std::size_t k = 1; k < jobs.size(); ++k) {
		CHECK(jobs[k].arrival >= jobs[k - 1].abs_deadline);
		gap_sum += jobs[k].arrival - jobs[k - 1].abs_deadline;
		CHECK(jobs[k].stream_id == 3);
	}
	CHECK(gap_sum / static_cast<double>(jobs.size() - 1) == doctest::Approx(5.0).epsilon(0.05));
	for (const auto &j : jobs) {
		CHECK(j.abs_deadline == j.arrival + 10.0);
		CHECK(j.arrival < 100000.0);
	}
}

TEST_CASE("[apsim] single stream without contention never misses")
{
	Rng rng(1);
	std::vector<JobStream> s{{4.0, 5.0, 2.0, 0}};
	auto rep = simulate_dm(s, 10000.0, rng);
	CHECK(rep.missed == 0);
	CHECK(rep.released > 100);
	CHECK(rep.released == rep.completed + rep.missed + rep.in_flight);
}

TEST_CASE("[apsim] two heavy streams released together: the lower priority job misses")
{
	std::vector<JobStream> s{{6.0, 10.0, 1.0, 0}, {6.0, 10.0, 1.0, 1}};
	std::vector<Job> jobs{{0, 0.0, 10.0, 6.0}, {1, 0.0, 10.0, 6.0}};
	std::vector<TraceRecord> trace;
	SimOptions opts;
	opts.trace = [&](const TraceRecord &r) { trace.push_back(r); };
	auto rep = simulate_jobs(s, jobs, 20.0, opts);
	CHECK(rep.missed == 1);
	CHECK(rep.per_stream[0].missed == 0);
	CHECK(rep.per_stream[1].missed == 1);
	CHECK(rep.max_synthetic_util == doctest::Approx(1.2));

	auto miss = std::find_if(trace.begin(), trace.end(), [](const TraceRecord &r) { return r.event == "miss"; });
	REQUIRE(miss != trace.end());
	CHECK(miss->time == 10.0);
	CHECK(miss->stream == 1);
}

TEST_CASE("[apsim] preemption follows deadline monotonic priority")
{
	// long-deadline job starts, a short-deadline job preempts at t = 2
	std::vector<JobStream> s{{2.0, 4.0, 1.0, 0}, {5.0, 20.0, 1.0, 1}};
	std::vector<Job> jobs{{1, 0.0, 20.0, 5.0}, {0, 2.0, 6.0, 2.0}};
	std::vector<TraceRecord> trace;
	SimOptions opts;
	opts.trace = [&](const TraceRecord &r) { trace.push_back(r); };
	auto rep = simulate_jobs(s, jobs, 30.0, opts);
	CHECK(rep.missed == 0);
	CHECK(rep.completed == 2);

	std::vector<std::string> expect{"0 release 1", "0 dispatch 1", "2 release 0", "2 preempt 1", "2 dispatch 0",
	                                "4 complete 0", "4 dispatch 1", "7 complete 1"};
	std::vector<std::string> got;
	for (const auto &r : trace) {
		std::ostringstream line;
		line << r.time << ' ' << r.event << ' ' << r.stream;
		got.push_back(line.str());
	}
	CHECK(got == expect);
	CHECK(rep.per_stream[0].max_response == doctest::Approx(2.0));
	CHECK(rep.per_stream[1].max_response == doctest::Approx(7.0));
}

TEST_CASE("[apsim] the processor never idles with work pending")
{
	Rng rng(21);
	auto streams = grid_streams(rng, 6);
	auto jobs = grid_jobs(streams, 400.0, rng);
	std::vector<TraceRecord> trace;
	SimOptions opts;
	opts.trace = [&](const TraceRecord &r) { trace.push_back(r); };
	simulate_jobs(streams, jobs, 400.0, opts);

	// After the last record at each instant, something runs iff work is pending.
	std::map<std::uint64_t, bool> pending;
	std::optional<std::uint64_t> running;
	int idle_with_work = 0;
	for (std::size_t i = 0; i < trace.size(); ++i) {
		const auto &r = trace[i];
		if (r.event == "release")
			pending[r.job] = true;
		else if (r.event == "complete" || r.event == "miss")
			pending.erase(r.job);
		if (r.event == "dispatch")
			running = r.job;
		else if (running == r.job && (r.event == "complete" || r.event == "miss" || r.event == "preempt"))
			running.reset();
		bool last_at_time = i + 1 == trace.size() || trace[i + 1].time != r.time;
		if (last_at_time && !running && !pending.empty())
			++idle_with_work;
	}
	CHECK(idle_with_work == 0);
}

TEST_CASE("[apsim] simulator agrees with a quantum-stepping reference")
{
	Rng rng(77);
	for (int rep_i = 0; rep_i < 60; ++rep_i) {
		auto streams = grid_streams(rng, static_cast<std::size_t>(rng.uniform_int(1, 5)));
		auto jobs = grid_jobs(streams, 200.0, rng);
		auto sim = simulate_jobs(streams, jobs, 200.0);
		auto ref = reference_dm(streams, jobs, 200.0, 0.5);
		// The reference does not count jobs still running at the horizon.
		CHECK(sim.missed == ref.missed);
		CHECK(sim.completed == ref.completed);
	}
}

TEST_CASE("[apsim] tracked max U(t) matches the definition")
{
	Rng rng(31);
	auto streams = grid_streams(rng, 5);
	auto jobs = grid_jobs(streams, 300.0, rng);
	auto rep = simulate_jobs(streams, jobs, 300.0);
	double peak = 0.0;
	for (const auto &j : jobs)
		peak = std::max(peak, synthetic_at(streams, jobs, j.arrival));
	CHECK(rep.max_synthetic_util == doctest::Approx(peak).epsilon(1e-12));
}

TEST_CASE("[apsim] runs under the synthetic utilization bound meet every deadline")
{
	Rng rng(8);
	int runs = 0;
	for (int k = 0; k < 200; ++k) {
		StreamGenConfig cfg;
		cfg.n_streams = 8;
		cfg.target_avg_util = 0.2;
		Rng r = rng.split(static_cast<std::uint64_t>(k));
		std::vector<JobStream> streams;
		try {
			streams = gen_streams(cfg, r);
		} catch (const ParameterError &) {
			continue;
		}
		auto rep = simulate_dm(streams, 20000.0, r);
		if (rep.max_synthetic_util > kSyntheticUtilizationBound)
			continue;
		++runs;
		CHECK(rep.missed == 0);
	}
	CHECK(runs > 20);
	CHECK(kSyntheticUtilizationBound == doctest::Approx(1.0 / (1.0 + std::sqrt(0.5))).epsilon(1e-15));
}

TEST_CASE("[apsim] warm-up jobs are left out of the counts")
{
	Rng a(3), b(3);
	std::vector<JobStream> s{{1.0, 10.0, 5.0, 0}};
	auto all = simulate_dm(s, 1000.0, a);
	SimOptions opts;
	opts.warmup_fraction = 0.5;
	auto half = simulate_dm(s, 1000.0, b, opts);
	CHECK(half.released < all.released);
	CHECK(half.released > 0);
	CHECK(half.released == half.completed + half.missed + half.in_flight);
}

TEST_CASE("[apsim] simulation is deterministic")
{
	StreamGenConfig cfg;
	Rng r1(12), r2(12);
	auto s1 = gen_streams(cfg, r1);
	auto s2 = gen_streams(cfg, r2);
	auto a = simulate_dm(s1, 50000.0, r1);
	auto b = simulate_dm(s2, 50000.0, r2);
	CHECK(a.released == b.released);
	CHECK(a.completed == b.completed);
	CHECK(a.missed == b.missed);
	CHECK(a.max_synthetic_util == b.max_synthetic_util);
}

TEST_CASE("[apsim] trace CSV")
{
	std::ostringstream out;
	write_trace_header(out);
	write_trace_record(out, TraceRecord{1.5, "release", 2, 7, "deadline=3"});
	CHECK(out.str() == "time,event,stream,job,detail\n1.5,release,2,7,deadline=3\n");
}

TEST_CASE("[apsim] streams drawn for a peak utilization")
{
	Rng rng(2);
	SyntheticSweepConfig cfg;
	auto s = gen_streams_with_peak(cfg, 0.8, rng);
	double sum = 0.0;
	for (const auto &x : s) {
		sum += x.density();
		CHECK(x.density() <= cfg.max_cd_ratio + 1e-12);
		CHECK(x.mean_gap == doctest::Approx(cfg.gap_factor * x.rel_deadline));
	}
	CHECK(sum == doctest::Approx(0.8));
	CHECK_THROWS_AS(gen_streams_with_peak(cfg, 5.0, rng), ParameterError);
}

TEST_CASE("[apsim] synthetic sweep is certain below the bound")
{
	SyntheticSweepConfig cfg;
	cfg.n_streams = 16;
	auto c = synthetic_sweep(cfg, SweepGrid{0.3, 0.55, 0.125}, 20, 1, 2);
	REQUIRE(c.size() == 3);
	for (double p : c.p_hat)
		CHECK(p == 1.0);
	CHECK(c.generator == "synthetic");
}
