#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <queue>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sharp/core.hpp"
#include "sharp/rng.hpp"
#include "sharp/threshold.hpp"

namespace sharp {

/// Synthetic utilization bound for deadline-monotonic scheduling of
/// aperiodic jobs: 1 / (1 + sqrt(1/2)).
inline constexpr double kSyntheticUtilizationBound = 0.5857864376269049;

/// U(t) = sum of c_i / D_i over jobs with a_i <= t <= a_i + D_i.
///
/// Contributions are added at arrival and leave once time passes their
/// absolute deadline, whether or not the job has completed.
class SyntheticUtilization {
public:
	void add(double arrival, double abs_deadline, double contribution);

	/// Drop jobs whose deadline is strictly before t (closed active interval).
	/// Returns how many left.
	std::size_t advance(double t);
	/// Drop jobs whose deadline is at or before t.
	std::size_t expire_through(double t);

	double value() const { return value_; }
	std::size_t active() const { return heap_.size(); }
	std::optional<double> next_expiry() const;
	/// Sum recomputed from the stored active set.
	double recompute() const;

private:
	struct Entry {
		double deadline;
		double contribution;
		bool operator>(const Entry &o) const { return deadline > o.deadline; }
	};
	template <typename Pred>
	std::size_t drop_while(Pred pred);

	std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap_;
	double value_ = 0.0;
};

/// Ready queue and processor of a preemptive fixed-priority uniprocessor.
///
/// Priority is (key, tie, seq) ascending; for deadline monotonic the key is
/// the relative deadline, `tie` the stream or class index and `seq` the
/// release order. Work is measured in time units at nominal speed; the
/// caller supplies the progress rate of each job when advancing time.
class FixedPriorityCore {
public:
	struct Ready {
		std::uint64_t seq;
		double key;
		std::size_t tie;
		double abs_deadline;
		double arrival;
		/// Work left at nominal speed; not part of the ordering.
		mutable double remaining;
		/// Opaque to the core; passed back to the rate function.
		double speed_sensitivity = 1.0;
		std::size_t owner = 0;
	};

	enum class Event { dispatch, preempt, complete, miss };
	using Observer = std::function<void(double t, Event, const Ready &)>;
	using RateFn = std::function<double(const Ready &)>;

	explicit FixedPriorityCore(Observer observer = {});

	void release(double t, Ready job);
	/// Run the highest-priority job (completing jobs on the way) until t.
	void advance_to(double t, const RateFn &rate);
	/// Jobs whose absolute deadline is <= t with work left are dropped as
	/// misses. Returns the dropped jobs.
	std::vector<Ready> expire(double t);

	/// Completion instant of the running job at the current rate.
	std::optional<double> next_completion(const RateFn &rate) const;
	std::optional<double> earliest_deadline() const;
	const Ready *running() const;
	std::size_t ready_count() const { return ready_.size(); }
	double now() const { return now_; }
	std::size_t completed() const { return completed_; }
	/// Total time spent executing jobs.
	double busy_time() const { return busy_; }

private:
	struct ByPriority {
		bool operator()(const Ready &a, const Ready &b) const;
	};
	void note_dispatch(double t);

	using ReadySet = std::set<Ready, ByPriority>;
	ReadySet ready_;
	std::multiset<std::pair<double, std::uint64_t>> deadlines_;
	std::unordered_map<std::uint64_t, ReadySet::iterator> by_seq_;
	Observer observer_;
	double now_ = 0.0;
	double busy_ = 0.0;
	std::size_t completed_ = 0;
	std::optional<std::uint64_t> last_running_;
};

struct StreamGenConfig {
	std::size_t n_streams = 32;
	double max_cd_ratio = 0.125;
	double d_min = 10.0;
	double d_max = 1000.0;
	/// Long-run average synthetic utilization; gaps are scaled to hit it.
	double target_avg_util = 0.5;
};

/// c_i/D_i uniform on (0, max_cd_ratio], D_i log-uniform on [d_min, d_max],
/// mean gap gamma * D_i with gamma chosen so the average synthetic
/// utilization sum(c_i/D_i) / (1 + gamma) equals the target.
std::vector<JobStream> gen_streams(const StreamGenConfig &cfg, Rng &rng);

/// a_0 = Exp(gap), a_{k+1} = a_k + D + Exp(gap), for arrivals < horizon.
std::vector<Job> release_jobs(const JobStream &stream, double horizon, Rng &rng);

struct StreamStats {
	std::size_t released = 0;
	std::size_t completed = 0;
	std::size_t missed = 0;
	double max_response = 0.0;
};

struct SimReport {
	std::size_t released = 0;
	std::size_t completed = 0;
	std::size_t missed = 0;
	std::size_t in_flight = 0;
	double miss_fraction = 0.0;
	double max_synthetic_util = 0.0;
	std::vector<StreamStats> per_stream;
	/// Set when the run stopped at its first miss.
	bool stopped_early = false;
};

struct TraceRecord {
	double time;
	std::string event;
	std::size_t stream;
	std::uint64_t job;
	std::string detail;
};

struct SimOptions {
	/// Jobs arriving before warmup_fraction * horizon are left out of the
	/// counts (U(t) is tracked over the whole run).
	double warmup_fraction = 0.0;
	bool stop_on_first_miss = false;
	std::function<void(const TraceRecord &)> trace;
};

/// Simulates a fixed job list (sorted by arrival) under preemptive DM.
SimReport simulate_jobs(std::span<const JobStream> streams, std::span<const Job> jobs, double horizon,
                        const SimOptions &opts = {});

/// Releases jobs for every stream (stream i draws from rng.split(i)) and
/// simulates them.
SimReport simulate_dm(std::span<const JobStream> streams, double horizon, Rng &rng,
                      const SimOptions &opts = {});

/// Merge per-stream releases into one arrival-ordered list.
std::vector<Job> release_all(std::span<const JobStream> streams, double horizon, Rng &rng);

void write_trace_header(std::ostream &out);
void write_trace_record(std::ostream &out, const TraceRecord &r);

/// The crossing depends mostly on d_max / d_min (wider spreads of relative
/// deadlines push it up); the defaults use a ratio of 5.
struct SyntheticSweepConfig {
	std::size_t n_streams = 32;
	double max_cd_ratio = 0.125;
	double d_min = 100.0;
	double d_max = 500.0;
	/// Mean gap as a multiple of each stream's deadline.
	double gap_factor = 0.01;
	/// Horizon as a multiple of the largest deadline.
	double horizon_factor = 50.0;
};

/// Streams whose densities sum to exactly `peak_util` (so U(t) never exceeds
/// it and approaches it whenever all streams are active).
std::vector<JobStream> gen_streams_with_peak(const SyntheticSweepConfig &cfg, double peak_util, Rng &rng);

/// Fraction of runs without a deadline miss at each grid value. The curve's
/// x-axis is the peak synthetic utilization.
ThresholdCurve synthetic_sweep(const SyntheticSweepConfig &cfg, const SweepGrid &grid, std::size_t trials,
                               std::uint64_t seed, unsigned jobs = 0);

} // namespace sharp
