#include "sharp/runner.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "sharp/error.hpp"
#include "sharp/sched.hpp"
#include "sharp/taskset_io.hpp"

#ifndef SHARP_VERSION
#define SHARP_VERSION "dev"
#endif

namespace sharp {

std::string toolkit_version()
{
	return SHARP_VERSION;
}

namespace {

std::string num(double v)
{
	return format_double(v);
}

struct Context {
	const ExperimentConfig &cfg;
	std::ostream &csv;
	std::ostream &note;
};

void write_curve_rows(std::ostream &out, const ThresholdCurve &c, const std::string &series)
{
	for (std::size_t i = 0; i < c.size(); ++i) {
		if (!series.empty())
			out << series << ',';
		out << num(c.grid[i]) << ',' << num(c.p_hat[i]) << ',' << num(c.ci_lo[i]) << ',' << num(c.ci_hi[i])
		    << ',' << c.trials[i] << '\n';
	}
}

void note_threshold(std::ostream &note, const std::string &label, const ThresholdCurve &c, double eps)
{
	try {
		auto est = locate_threshold(c, eps);
		note << label << ": u_star=" << num(est.u_star) << " [" << num(est.u_star_lo) << ", "
		     << num(est.u_star_hi) << "] width=" << num(est.width) << '\n';
	} catch (const RangeError &e) {
		note << label << ": " << e.what() << '\n';
	}
}

int cmd_gen(const Context &ctx)
{
	const auto &cfg = ctx.cfg;
	Rng rng(cfg.seed);
	auto ts = draw_taskset(cfg.workload(), cfg.utilization, rng);
	write_taskset(ctx.csv, ts);
	return exit_ok;
}

int cmd_check(const Context &ctx)
{
	if (ctx.cfg.input.empty())
		throw ParameterError("check: no task-set file given");
	auto ts = read_taskset_file(ctx.cfg.input);
	auto res = analyze_rm(ts);

	ctx.csv << "index,period,exec_time,deadline,response_time\n";
	for (std::size_t i = 0; i < ts.size(); ++i) {
		ctx.csv << i << ',' << ts[i].period << ',' << num(ts[i].exec_time) << ',' << num(ts[i].deadline) << ',';
		if (res.response[i])
			ctx.csv << num(*res.response[i]);
		else
			ctx.csv << "exceeds";
		ctx.csv << '\n';
	}
	ctx.note << "utilization " << num(utilization(ts)) << ", bound " << num(ll_bound(ts.size())) << '\n';
	ctx.note << "verdict: " << (res.schedulable ? "schedulable" : "unschedulable") << '\n';
	return res.schedulable ? exit_ok : exit_unschedulable;
}

int cmd_sweep(const Context &ctx)
{
	const auto &cfg = ctx.cfg;
	auto spec = cfg.workload();
	auto curve = sweep(spec, cfg.grid(), cfg.trials, cfg.seed, cfg.jobs);
	ctx.csv << "utilization,p_hat,ci_lo,ci_hi,trials\n";
	write_curve_rows(ctx.csv, curve, "");
	note_threshold(ctx.note, spec.tag() + " n=" + std::to_string(spec.n), curve, cfg.epsilon);
	return exit_ok;
}

void write_threshold_row(std::ostream &out, std::size_t n, const ThresholdEstimate &e, std::uint64_t seed)
{
	out << n << ',' << num(e.u_star) << ',' << num(e.width) << ',' << num(e.epsilon) << ',' << seed << '\n';
}

int cmd_threshold(const Context &ctx)
{
	const auto &cfg = ctx.cfg;
	auto curve = sweep(cfg.workload(), cfg.grid(), cfg.trials, cfg.seed, cfg.jobs);
	auto est = locate_threshold(curve, cfg.epsilon);
	ctx.csv << "n,u_star,width,epsilon,seed\n";
	write_threshold_row(ctx.csv, cfg.n, est, cfg.seed);
	return exit_ok;
}

int cmd_width(const Context &ctx)
{
	const auto &cfg = ctx.cfg;
	auto ws = width_scaling(cfg.n_list, cfg.workload(), cfg.grid(), cfg.trials, cfg.seed, cfg.epsilon, cfg.jobs);
	ctx.csv << "n,u_star,width,epsilon,seed\n";
	for (const auto &p : ws.points)
		write_threshold_row(ctx.csv, p.n, p.estimate, cfg.seed);
	ctx.note << "log(width) = " << num(ws.intercept) << " + " << num(ws.slope) << " log(n)\n";
	return exit_ok;
}

int cmd_apsim(const Context &ctx)
{
	const auto &cfg = ctx.cfg;
	Rng rng(cfg.seed);
	Rng stream_rng = rng.split(0);
	auto streams = gen_streams(cfg.stream_config(), stream_rng);
	double max_d = 0.0;
	for (const auto &s : streams)
		max_d = std::max(max_d, s.rel_deadline);
	double horizon = cfg.horizon > 0.0 ? cfg.horizon : 1e4 * max_d;

	SimOptions opts;
	opts.warmup_fraction = cfg.warmup;
	std::ofstream trace;
	if (!cfg.trace.empty()) {
		trace.open(cfg.trace);
		if (!trace)
			throw InputError("cannot write trace file '" + cfg.trace + "'");
		write_trace_header(trace);
		opts.trace = [&trace](const TraceRecord &r) { write_trace_record(trace, r); };
	}
	Rng jobs_rng = rng.split(1);
	auto rep = simulate_dm(streams, horizon, jobs_rng, opts);

	ctx.csv << "stream,exec_time,rel_deadline,mean_gap,released,completed,missed,max_response\n";
	for (std::size_t i = 0; i < streams.size(); ++i) {
		const auto &s = streams[i];
		const auto &st = rep.per_stream[i];
		ctx.csv << i << ',' << num(s.exec_time) << ',' << num(s.rel_deadline) << ',' << num(s.mean_gap) << ','
		        << st.released << ',' << st.completed << ',' << st.missed << ',' << num(st.max_response) << '\n';
	}
	ctx.note << "released " << rep.released << ", completed " << rep.completed << ", missed " << rep.missed
	         << ", miss fraction " << num(rep.miss_fraction) << ", max U(t) " << num(rep.max_synthetic_util)
	         << '\n';
	return exit_ok;
}

void write_dvs_row(std::ostream &out, const EnergyReport &r)
{
	out << num(r.load) << ',' << num(r.set_point) << ',' << num(r.energy_j) << ',' << num(r.avg_power_w) << ','
	    << num(r.miss_fraction) << ',' << r.admitted << ',' << r.rejected << '\n';
}

int cmd_dvs(const Context &ctx)
{
	const auto &cfg = ctx.cfg;
	auto profile = cfg.dvs_profile();
	auto classes = default_service_classes();
	Rng rng(cfg.seed);
	auto rep = run_workload(profile, classes, cfg.dvs_workload(), cfg.set_point, rng);
	ctx.csv << "load,set_point,energy,avg_power,miss_fraction,admitted,rejected\n";
	write_dvs_row(ctx.csv, rep);
	return exit_ok;
}

int recipe_curves(const Context &ctx)
{
	const auto &cfg = ctx.cfg;
	ctx.csv << "series,utilization,p_hat,ci_lo,ci_hi,trials\n";
	for (std::size_t n : cfg.n_list) {
		auto spec = cfg.workload(n);
		auto curve = sweep(spec, cfg.grid(), cfg.trials, cfg.seed, cfg.jobs);
		std::string series = spec.tag() + "-n" + std::to_string(n);
		write_curve_rows(ctx.csv, curve, series);
		note_threshold(ctx.note, series, curve, cfg.epsilon);
	}
	return exit_ok;
}

int recipe_fig4(const Context &ctx)
{
	const auto &cfg = ctx.cfg;
	SyntheticSweepConfig sc;
	sc.n_streams = cfg.streams;
	sc.max_cd_ratio = cfg.cd_cap;
	sc.d_min = cfg.d_min;
	sc.d_max = cfg.d_max;
	auto curve = synthetic_sweep(sc, cfg.grid(), cfg.trials, cfg.seed, cfg.jobs);
	std::string series = "synthetic-n" + std::to_string(cfg.streams);
	ctx.csv << "series,utilization,p_hat,ci_lo,ci_hi,trials\n";
	write_curve_rows(ctx.csv, curve, series);
	note_threshold(ctx.note, series, curve, cfg.epsilon);
	return exit_ok;
}

int recipe_fig8(const Context &ctx)
{
	const auto &cfg = ctx.cfg;
	auto profile = cfg.dvs_profile();
	auto classes = default_service_classes();
	auto loads = benchmark_loads();
	auto sps = benchmark_set_points();
	auto reps = set_point_ladder(profile, classes, cfg.dvs_workload(), loads, sps, cfg.seed, cfg.jobs);
	ctx.csv << "series,load,set_point,energy,avg_power,miss_fraction,admitted,rejected\n";
	for (const auto &r : reps) {
		ctx.csv << "set-point-" << num(r.set_point) << ',';
		write_dvs_row(ctx.csv, r);
	}
	return exit_ok;
}

int cmd_recipe(const Context &ctx)
{
	const std::string &name = ctx.cfg.recipe;
	if (name == "fig3a" || name == "fig3b" || name == "fig5")
		return recipe_curves(ctx);
	if (name == "fig4")
		return recipe_fig4(ctx);
	if (name == "fig8")
		return recipe_fig8(ctx);
	throw ParameterError("unknown recipe '" + name + "'");
}

int dispatch(const Context &ctx)
{
	const std::string &c = ctx.cfg.command;
	if (c == "gen")
		return cmd_gen(ctx);
	if (c == "check")
		return cmd_check(ctx);
	if (c == "sweep")
		return cmd_sweep(ctx);
	if (c == "threshold")
		return cmd_threshold(ctx);
	if (c == "width")
		return cmd_width(ctx);
	if (c == "apsim")
		return cmd_apsim(ctx);
	if (c == "dvs")
		return cmd_dvs(ctx);
	if (c == "recipe")
		return cmd_recipe(ctx);
	throw ParameterError("command: unknown subcommand '" + c + "'");
}

} // namespace

const std::vector<std::string> &recipe_names()
{
	static const std::vector<std::string> names{"fig3a", "fig3b", "fig4", "fig5", "fig8"};
	return names;
}

ExperimentConfig recipe_preset(const std::string &name, ExperimentConfig base)
{
	base.command = "recipe";
	base.recipe = name;
	if (name == "fig3a" || name == "fig3b" || name == "fig5") {
		base.generator = name == "fig3b" ? "equal-split" : "uunisort";
		base.period_rule = name == "fig5" ? "set" : "uniform";
		base.n_list = {8, 16, 32, 64};
		base.u_min = 0.6;
		base.u_max = 1.0;
		base.u_step = 0.02;
		base.trials = 2000;
	} else if (name == "fig4") {
		SyntheticSweepConfig sc;
		base.streams = sc.n_streams;
		base.cd_cap = sc.max_cd_ratio;
		base.d_min = sc.d_min;
		base.d_max = sc.d_max;
		base.u_min = 0.5;
		base.u_max = 1.0;
		base.u_step = 0.025;
		base.trials = 200;
	} else if (name == "fig8") {
		WorkloadConfig w = benchmark_workload();
		base.sessions = w.sessions;
		base.exec_cv = w.exec_cv;
		base.hysteresis = w.hysteresis_delay;
	} else {
		throw ParameterError("unknown recipe '" + name + "'");
	}
	return base;
}

int run(const ExperimentConfig &cfg, std::ostream &out, std::ostream &err)
{
	try {
		if (cfg.out.empty())
			return dispatch({cfg, out, err});

		std::ostringstream csv;
		int code = dispatch({cfg, csv, out});
		std::ofstream f(cfg.out, std::ios::binary);
		if (!f)
			throw InputError("cannot write output file '" + cfg.out + "'");
		f << csv.str();
		std::ofstream rec(cfg.out + ".run", std::ios::binary);
		if (!rec)
			throw InputError("cannot write run record '" + cfg.out + ".run'");
		rec << "# sharp " << toolkit_version() << " run record\n";
		write_config(rec, cfg);
		return code;
	} catch (const ParameterError &e) {
		err << "error: " << e.what() << '\n';
	} catch (const InputError &e) {
		err << "error: " << e.what() << '\n';
	} catch (const RangeError &e) {
		err << "error: " << e.what() << '\n';
	}
	return exit_usage;
}

} // namespace sharp
