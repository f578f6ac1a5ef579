#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fpps/nn_engine.hpp"
#include "fpps_cli/commands.hpp"

namespace fpps::cli {

namespace {

// Flags as parsed; unset ones fall back to the config file, then the
// environment, then the built-in defaults.
struct Flags {
    std::optional<std::string> config;
    std::vector<std::string> backends;
    std::optional<std::size_t> max_iterations;
    std::optional<double> max_corr_dist;
    std::optional<double> epsilon;
    std::optional<std::size_t> sample_n;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> tile_size;
    std::optional<std::size_t> partitions;
    std::optional<unsigned> workers;
    std::optional<std::size_t> max_frames;
    bool two_stage = false;
    bool include_io = false;
    bool omit_timing = false;
    std::string format = "text";
    std::optional<std::string> out;
};

void add_run_flags(CLI::App& cmd, Flags& f, bool many_backends) {
    cmd.add_option("--config", f.config, "JSON file with run settings");
    if (many_backends) {
        cmd.add_option("--backend,--backends", f.backends, "backends to compare (parallel, naive, kdtree)")
            ->delimiter(',');
    } else {
        cmd.add_option("--backend", f.backends, "parallel, naive or kdtree")->expected(1);
    }
    cmd.add_option("--max-iterations", f.max_iterations, "ICP iteration cap (default 50)");
    cmd.add_option("--max-corr-dist", f.max_corr_dist, "correspondence gate in metres (default 1.0)");
    cmd.add_option("--epsilon", f.epsilon, "transformation epsilon (default 1e-5)");
    cmd.add_option("--sample-n", f.sample_n, "source points sampled per frame, 0 for all (default 4096)");
    cmd.add_option("--seed", f.seed, "sampling seed (default 42)");
    cmd.add_option("--tile-size", f.tile_size, "source points per kernel tile");
    cmd.add_option("--partitions", f.partitions, "target lanes per tile");
    cmd.add_option("--workers", f.workers, "kernel worker threads, 0 for all cores");
    cmd.add_option("--max-frames", f.max_frames, "use only the first N frames of a sequence");
    cmd.add_flag("--two-stage", f.two_stage, "refine the sampled result on the full source cloud");
    cmd.add_flag("--include-io", f.include_io, "also report file loading time");
    cmd.add_flag("--omit-timing", f.omit_timing, "report zero latencies for reproducible output");
    cmd.add_option("--format", f.format, "text, csv or json")->check(CLI::IsMember({"text", "csv", "json"}));
    cmd.add_option("--out", f.out, "write the report to this file");
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config " + path + ": " + e.what());
    }
}

template <class T>
void take(const nlohmann::json& doc, const char* key, T& field) {
    if (!doc.contains(key)) return;
    try {
        field = doc[key].get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

RunOptions resolve(const Flags& f, std::vector<nn::Backend>* backend_list) {
    RunOptions opts;
    opts.icp.backend = nn::backend_from_environment(nn::Backend::parallel);
    std::vector<std::string> config_backends;

    if (f.config) {
        const nlohmann::json doc = read_json_file(*f.config);
        if (!doc.is_object()) throw ConfigError("config must be a JSON object");
        if (doc.contains("backend")) {
            if (doc["backend"].is_array()) {
                take(doc, "backend", config_backends);
            } else {
                std::string one;
                take(doc, "backend", one);
                config_backends.push_back(one);
            }
        }
        take(doc, "max_iterations", opts.icp.max_iterations);
        take(doc, "max_corr_dist", opts.icp.max_correspondence_distance);
        take(doc, "epsilon", opts.icp.transformation_epsilon);
        take(doc, "sample_n", opts.sample_n);
        take(doc, "seed", opts.seed);
        take(doc, "two_stage", opts.two_stage);
        take(doc, "max_frames", opts.max_frames);
        if (doc.contains("tile")) {
            const nlohmann::json& t = doc["tile"];
            take(t, "source_tile_size", opts.icp.tile.source_tile_size);
            take(t, "target_partitions", opts.icp.tile.target_partitions);
            take(t, "target_capacity", opts.icp.tile.target_capacity);
            take(t, "workers", opts.icp.tile.workers);
        }
    }

    const std::vector<std::string>& names = f.backends.empty() ? config_backends : f.backends;
    std::vector<nn::Backend> parsed;
    for (const std::string& n : names) parsed.push_back(nn::parse_backend(n));
    if (!parsed.empty()) opts.icp.backend = parsed.front();
    if (backend_list) *backend_list = parsed;

    if (f.max_iterations) opts.icp.max_iterations = *f.max_iterations;
    if (f.max_corr_dist) opts.icp.max_correspondence_distance = *f.max_corr_dist;
    if (f.epsilon) opts.icp.transformation_epsilon = *f.epsilon;
    if (f.sample_n) opts.sample_n = *f.sample_n;
    if (f.seed) opts.seed = *f.seed;
    if (f.tile_size) opts.icp.tile.source_tile_size = *f.tile_size;
    if (f.partitions) opts.icp.tile.target_partitions = *f.partitions;
    if (f.workers) opts.icp.tile.workers = *f.workers;
    if (f.max_frames) opts.max_frames = *f.max_frames;
    opts.two_stage = opts.two_stage || f.two_stage;
    opts.include_io = f.include_io;
    opts.omit_timing = f.omit_timing;
    opts.icp.validate();
    return opts;
}

// Writes to --out when given, otherwise to `out`.
template <class Fn>
void emit(const std::optional<std::string>& path, std::ostream& out, Fn&& write) {
    if (!path) {
        write(out);
        return;
    }
    std::ofstream file(*path, std::ios::binary);
    if (!file) throw ConfigError("cannot write " + *path);
    write(file);
    if (!file) throw Error("failed writing " + *path);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"fpps: point-cloud registration with exact nearest-neighbour search"};
    app.name("fpps");
    app.require_subcommand(1);

    Flags reg_flags, bench_flags, cmp_flags;
    std::string reg_source, reg_target;
    CLI::App* reg = app.add_subcommand("register", "align one source cloud to a target cloud");
    reg->add_option("--source", reg_source, "source cloud (.bin, .xyz)")->required();
    reg->add_option("--target", reg_target, "target cloud (.bin, .xyz)")->required();
    add_run_flags(*reg, reg_flags, false);

    std::string bench_dir;
    std::optional<std::string> bench_poses;
    CLI::App* bench = app.add_subcommand("bench", "register consecutive frames of a sequence");
    bench->add_option("--seq-dir", bench_dir, "directory of numbered .bin frames")->required();
    bench->add_option("--poses", bench_poses, "ground-truth poses for trajectory error");
    add_run_flags(*bench, bench_flags, false);

    std::string cmp_dir;
    CLI::App* cmp = app.add_subcommand("compare", "run a sequence on several backends and compare");
    cmp->add_option("--seq-dir", cmp_dir, "directory of numbered .bin frames")->required();
    add_run_flags(*cmp, cmp_flags, true);

    std::optional<std::string> model_config;
    std::uint64_t n_source = 4096, n_target = 131072;
    std::optional<std::string> sweep_spec;
    std::string model_format = "text";
    std::optional<std::string> model_out;
    CLI::App* model = app.add_subcommand("model", "estimate pipeline cycles for a PE-array geometry");
    model->add_option("--geometry,--config", model_config, "JSON geometry config");
    model->add_option("--n-source", n_source, "source points (default 4096)");
    model->add_option("--n-target", n_target, "target points (default 131072)");
    model->add_option("--sweep", sweep_spec, "field=v1,v2,... emits CSV");
    model->add_option("--format", model_format, "text, csv or json")->check(CLI::IsMember({"text", "csv", "json"}));
    model->add_option("--out", model_out, "write the report to this file");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitError;
    }

    try {
        if (*reg) {
            const RunOptions opts = resolve(reg_flags, nullptr);
            const RegisterOutcome outcome = run_register(reg_source, reg_target, opts);
            emit(reg_flags.out, out, [&](std::ostream& os) {
                write_register(os, outcome, parse_format(reg_flags.format), opts);
            });
            return outcome.result.converged ? kExitOk : kExitNotConverged;
        }
        if (*bench) {
            const RunOptions opts = resolve(bench_flags, nullptr);
            std::optional<fs::path> poses;
            if (bench_poses) poses = *bench_poses;
            const BenchReport report = run_bench(bench_dir, poses, opts);
            const Format format = parse_format(bench_flags.format);
            emit(bench_flags.out, out, [&](std::ostream& os) {
                if (format == Format::csv) write_csv(os, report);
                else if (format == Format::json) write_json(os, report);
                else write_text(os, report);
            });
            return kExitOk;
        }
        if (*cmp) {
            std::vector<nn::Backend> backends;
            const RunOptions opts = resolve(cmp_flags, &backends);
            if (backends.size() < 2) {
                err << "error: compare needs at least two backends, e.g. --backend parallel,naive\n";
                return kExitError;
            }
            const CompareReport report = run_compare(cmp_dir, backends, opts);
            emit(cmp_flags.out, out, [&](std::ostream& os) {
                write_compare(os, report, parse_format(cmp_flags.format));
            });
            return kExitOk;
        }
        if (*model) {
            ModelConfig cfg;
            if (model_config) cfg = read_model_config(*model_config);
            cfg.geometry.validate();
            emit(model_out, out, [&](std::ostream& os) {
                if (sweep_spec) {
                    write_sweep(os, cfg, parse_sweep(*sweep_spec), n_source, n_target);
                } else {
                    const auto e = dataflow::estimate_pipeline(cfg.geometry, n_source, n_target,
                                                               cfg.coefficients);
                    write_model(os, e, cfg.geometry, n_source, n_target, parse_format(model_format));
                }
            });
            return kExitOk;
        }
    } catch (const EquivalenceError& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}

}  // namespace fpps::cli
