#include "fpps_cli/commands.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <json.hpp>

#include "fpps/dataset_io.hpp"

namespace fpps::cli {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

PointCloud maybe_sample(const PointCloud& cloud, const RunOptions& opts) {
    return opts.sample_n == 0 ? cloud : io::sample_points(cloud, opts.sample_n, opts.seed);
}

struct AlignRun {
    IcpResult result;
    double latency_ms = 0.0;
    std::size_t iterations = 0;
};

// One- or two-stage registration of `full_source` onto `target`.
AlignRun register_pair(const PointCloud& full_source, const PointCloud& target, const RunOptions& opts) {
    const PointCloud sampled = maybe_sample(full_source, opts);
    AlignRun run;
    auto start = Clock::now();
    run.result = align(sampled, target, opts.icp);
    run.latency_ms = elapsed_ms(start);
    run.iterations = run.result.iterations_run;
    if (opts.two_stage && sampled.size() < full_source.size()) {
        IcpConfig refine = opts.icp;
        refine.initial_transform = run.result.final_transform;
        start = Clock::now();
        run.result = align(full_source, target, refine);
        run.latency_ms += elapsed_ms(start);
        run.iterations += run.result.iterations_run;
    }
    return run;
}

void write_transform_text(std::ostream& os, const RigidTransform& t) {
    const auto m = t.matrix4();
    os << std::fixed << std::setprecision(9);
    for (std::size_t r = 0; r < 4; ++r) {
        os << ' ';
        for (std::size_t c = 0; c < 4; ++c) os << ' ' << std::setw(14) << m[4 * r + c];
        os << '\n';
    }
    os.unsetf(std::ios::floatfield);
}

nlohmann::ordered_json transform_json(const RigidTransform& t) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    const auto m = t.matrix4();
    for (std::size_t i = 0; i < 4; ++i) rows.push_back({m[4 * i], m[4 * i + 1], m[4 * i + 2], m[4 * i + 3]});
    return rows;
}

}  // namespace

RegisterOutcome run_register(const fs::path& source, const fs::path& target, const RunOptions& opts) {
    RegisterOutcome out;
    const auto io_start = Clock::now();
    const PointCloud src = io::load_cloud(source);
    const PointCloud tgt = io::load_cloud(target);
    out.io_ms = elapsed_ms(io_start);
    const AlignRun run = register_pair(src, tgt, opts);
    out.result = run.result;
    out.result.iterations_run = run.iterations;
    out.latency_ms = run.latency_ms;
    return out;
}

std::vector<std::pair<long, fs::path>> list_frames(const fs::path& seq_dir) {
    if (!fs::is_directory(seq_dir)) throw ConfigError(seq_dir.string() + " is not a directory");
    std::vector<std::pair<long, fs::path>> frames;
    for (const fs::directory_entry& entry : fs::directory_iterator(seq_dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".bin") continue;
        const std::string stem = entry.path().stem().string();
        long index = 0;
        const auto [ptr, ec] = std::from_chars(stem.data(), stem.data() + stem.size(), index);
        if (ec != std::errc() || ptr != stem.data() + stem.size()) {
            warn("skipping " + entry.path().string() + ": file name is not a frame number");
            continue;
        }
        frames.emplace_back(index, entry.path());
    }
    if (frames.empty()) throw ConfigError("no .bin frames in " + seq_dir.string());
    std::sort(frames.begin(), frames.end());
    return frames;
}

BenchReport run_bench(const fs::path& seq_dir, const std::optional<fs::path>& poses,
                      const RunOptions& opts) {
    auto frames = list_frames(seq_dir);
    if (opts.max_frames > 0 && frames.size() > opts.max_frames) frames.resize(opts.max_frames);
    if (frames.size() < 2) throw ConfigError("need at least two frames in " + seq_dir.string());

    std::optional<io::PoseTrack> track;
    if (poses) track = io::read_kitti_poses(*poses);

    BenchReport report;
    report.backend = std::string(nn::to_string(opts.icp.backend));
    report.include_io = opts.include_io;
    report.omit_timing = opts.omit_timing;

    // The source of one pair is the target of the next, so keep it around.
    std::optional<PointCloud> previous;
    long previous_index = 0;
    for (const auto& [index, path] : frames) {
        const auto io_start = Clock::now();
        std::optional<PointCloud> current;
        try {
            current = io::read_kitti_bin(path).points;
        } catch (const FormatError& e) {
            warn(std::string("skipping frame: ") + e.what());
            previous.reset();
            continue;
        }
        const double io_ms = elapsed_ms(io_start);

        if (previous && index == previous_index + 1 && !current->empty() && !previous->empty()) {
            try {
                const AlignRun run = register_pair(*current, *previous, opts);
                FrameRecord rec;
                rec.frame = index;
                rec.rmse_m = run.result.fitness_rmse;
                rec.latency_ms = run.latency_ms;
                rec.io_ms = io_ms;
                rec.iterations = run.iterations;
                rec.converged = run.result.converged;
                rec.transform = run.result.final_transform;
                if (track) {
                    const auto k = static_cast<std::size_t>(previous_index);
                    if (k + 1 < track->poses.size()) {
                        const RigidTransform truth =
                            compose(inverse(track->poses[k]), track->poses[k + 1]);
                        const RigidTransform err = compose(inverse(truth), rec.transform);
                        rec.gt_trans_err_m = norm(err.translation());
                        rec.gt_rot_err_rad = err.rotation_angle();
                    } else {
                        warn("no ground-truth pose for frame " + std::to_string(index));
                    }
                }
                report.records.push_back(rec);
            } catch (const DegenerateCorrespondenceError& e) {
                warn("frame " + std::to_string(index) + ": " + e.what());
            } catch (const DegenerateGeometryError& e) {
                warn("frame " + std::to_string(index) + ": " + e.what());
            }
        } else if (previous && index != previous_index + 1) {
            warn("frames " + std::to_string(previous_index + 1) + " to " + std::to_string(index - 1) +
                 " are missing; no pair across the gap");
        }
        previous = std::move(current);
        previous_index = index;
    }
    return report;
}

EquivalenceError::EquivalenceError(const std::string& backend_a, const std::string& backend_b,
                                   long frame, const std::string& field)
    : Error("backends " + backend_a + " and " + backend_b + " disagree at frame " +
            std::to_string(frame) + " on " + field),
      frame_(frame),
      field_(field) {}

void check_equivalent(const BenchReport& a, const BenchReport& b) {
    const auto fail = [&](long frame, const std::string& field) {
        throw EquivalenceError(a.backend, b.backend, frame, field);
    };
    const std::size_t n = std::min(a.records.size(), b.records.size());
    for (std::size_t i = 0; i < n; ++i) {
        const FrameRecord& x = a.records[i];
        const FrameRecord& y = b.records[i];
        if (x.frame != y.frame) fail(std::min(x.frame, y.frame), "frame set");
        const auto mx = x.transform.matrix4(), my = y.transform.matrix4();
        for (std::size_t k = 0; k < 12; ++k) {
            if (std::abs(mx[k] - my[k]) > kEquivalenceTolerance) {
                fail(x.frame, "transform[" + std::to_string(k / 4) + "][" + std::to_string(k % 4) + "]");
            }
        }
        if (std::abs(x.rmse_m - y.rmse_m) > kEquivalenceTolerance) fail(x.frame, "rmse_m");
        if (x.iterations != y.iterations) fail(x.frame, "iterations");
        if (x.converged != y.converged) fail(x.frame, "converged");
    }
    if (a.records.size() != b.records.size()) {
        const auto& longer = a.records.size() > b.records.size() ? a.records : b.records;
        fail(longer[n].frame, "frame set");
    }
}

CompareReport run_compare(const fs::path& seq_dir, const std::vector<nn::Backend>& backends,
                          const RunOptions& opts) {
    std::vector<nn::Backend> unique;
    for (nn::Backend b : backends) {
        if (std::find(unique.begin(), unique.end(), b) == unique.end()) unique.push_back(b);
    }
    if (unique.size() < 2) throw ConfigError("compare needs at least two distinct backends");

    CompareReport report;
    for (nn::Backend b : unique) {
        RunOptions o = opts;
        o.icp.backend = b;
        report.runs.push_back(run_bench(seq_dir, std::nullopt, o));
    }
    for (std::size_t i = 1; i < report.runs.size(); ++i) check_equivalent(report.runs[0], report.runs[i]);

    if (!opts.omit_timing) {
        const auto naive = std::find(unique.begin(), unique.end(), nn::Backend::naive);
        const std::size_t base = naive == unique.end() ? 0 : static_cast<std::size_t>(naive - unique.begin());
        for (std::size_t i = 0; i < report.runs.size(); ++i) {
            const BenchReport& baseline = report.runs[base];
            if (i != base && baseline.average_latency_ms() > 0.0 && report.runs[i].average_latency_ms() > 0.0) {
                report.runs[i].baseline = baseline.backend;
                report.runs[i].speedup = speedup(baseline, report.runs[i]);
            }
        }
        for (std::size_t i = 0; i < report.runs.size(); ++i) {
            for (std::size_t j = 0; j < report.runs.size(); ++j) {
                if (i == j) continue;
                if (report.runs[i].average_latency_ms() > 0.0 && report.runs[j].average_latency_ms() > 0.0) {
                    report.speedups.push_back(
                        {report.runs[i].backend, report.runs[j].backend, speedup(report.runs[i], report.runs[j])});
                }
            }
        }
    }
    return report;
}

void write_compare(std::ostream& os, const CompareReport& report, Format format) {
    switch (format) {
        case Format::csv:
            os << "backend,frame,rmse_m,latency_ms,iterations,converged\n";
            for (const BenchReport& run : report.runs) {
                for (const FrameRecord& r : run.records) {
                    os << run.backend << ',' << r.frame << ',' << format_real(r.rmse_m) << ','
                       << format_real(run.omit_timing ? 0.0 : r.latency_ms) << ',' << r.iterations << ','
                       << (r.converged ? "true" : "false") << '\n';
                }
            }
            return;
        case Format::json: {
            nlohmann::ordered_json doc;
            doc["equivalent"] = true;
            nlohmann::ordered_json runs = nlohmann::ordered_json::array();
            for (const BenchReport& run : report.runs) {
                std::ostringstream one;
                write_json(one, run);
                runs.push_back(nlohmann::ordered_json::parse(one.str()));
            }
            doc["runs"] = runs;
            nlohmann::ordered_json sp = nlohmann::ordered_json::array();
            for (const SpeedupEntry& s : report.speedups) {
                sp.push_back({{"baseline", s.baseline}, {"backend", s.backend}, {"speedup", s.speedup}});
            }
            doc["speedups"] = sp;
            os << doc.dump(2) << '\n';
            return;
        }
        case Format::text:
            for (const BenchReport& run : report.runs) {
                write_text(os, run);
                os << '\n';
            }
            os << "results identical across backends (tolerance " << kEquivalenceTolerance << ")\n";
            if (!report.speedups.empty()) {
                os << std::left << std::setw(10) << "baseline" << std::setw(10) << "backend" << std::right
                   << std::setw(10) << "speedup" << '\n';
                os << std::fixed << std::setprecision(2);
                for (const SpeedupEntry& s : report.speedups) {
                    os << std::left << std::setw(10) << s.baseline << std::setw(10) << s.backend
                       << std::right << std::setw(9) << s.speedup << "x\n";
                }
                os.unsetf(std::ios::floatfield);
            }
            return;
    }
}

void write_register(std::ostream& os, const RegisterOutcome& outcome, Format format,
                    const RunOptions& opts) {
    const IcpResult& r = outcome.result;
    const double latency = opts.omit_timing ? 0.0 : outcome.latency_ms;
    switch (format) {
        case Format::csv:
            os << "frame,rmse_m,latency_ms,iterations,converged\n";
            os << 0 << ',' << format_real(r.fitness_rmse) << ',' << format_real(latency) << ','
               << r.iterations_run << ',' << (r.converged ? "true" : "false") << '\n';
            return;
        case Format::json: {
            nlohmann::ordered_json doc;
            doc["backend"] = std::string(nn::to_string(opts.icp.backend));
            doc["transform"] = transform_json(r.final_transform);
            doc["rmse_m"] = r.fitness_rmse;
            doc["iterations"] = r.iterations_run;
            doc["converged"] = r.converged;
            doc["inliers"] = r.final_inlier_count();
            doc["wall_time_ms"] = latency;
            if (opts.include_io) doc["io_ms"] = opts.omit_timing ? 0.0 : outcome.io_ms;
            os << doc.dump(2) << '\n';
            return;
        }
        case Format::text:
            os << "final transform:\n";
            write_transform_text(os, r.final_transform);
            os << "rmse_m: " << std::fixed << std::setprecision(6) << r.fitness_rmse << '\n';
            os << "iterations: " << r.iterations_run << '\n';
            os << "converged: " << (r.converged ? "yes" : "no") << '\n';
            os << "inliers: " << r.final_inlier_count() << '\n';
            os << "wall_time_ms: " << std::setprecision(3) << latency << '\n';
            if (opts.include_io) os << "io_ms: " << (opts.omit_timing ? 0.0 : outcome.io_ms) << '\n';
            os.unsetf(std::ios::floatfield);
            return;
    }
}

ModelConfig parse_model_config(const std::string& json_text) {
    ModelConfig cfg;
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("geometry config: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("geometry config must be a JSON object");
    const nlohmann::json& g = doc.contains("geometry") ? doc["geometry"] : doc;
    try {
        auto count = [&](const nlohmann::json& obj, const char* key, std::uint64_t& field) {
            if (!obj.contains(key)) return;
            const auto& v = obj[key];
            if (!v.is_number_integer() || v.get<long long>() < 1) {
                throw ConfigError(std::string("geometry config: ") + key + " must be an integer >= 1");
            }
            field = v.get<std::uint64_t>();
        };
        count(g, "pe_rows", cfg.geometry.pe_rows);
        count(g, "pe_cols", cfg.geometry.pe_cols);
        count(g, "fifo_depth", cfg.geometry.fifo_depth);
        count(g, "read_width", cfg.geometry.read_width);
        if (g.contains("clock_mhz")) cfg.geometry.clock_mhz = g["clock_mhz"].get<double>();
        if (doc.contains("coefficients")) {
            const auto& k = doc["coefficients"];
            count(k, "target_bank_depth", cfg.coefficients.target_bank_depth);
            count(k, "read_cycles_per_source", cfg.coefficients.read_cycles_per_source);
            count(k, "accumulate_cycles_per_result", cfg.coefficients.accumulate_cycles_per_result);
            count(k, "cycles_per_tree_level", cfg.coefficients.cycles_per_tree_level);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("geometry config: ") + e.what());
    }
    cfg.geometry.validate();
    return cfg;
}

ModelConfig read_model_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open geometry config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_model_config(buf.str());
}

Sweep parse_sweep(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("sweep must look like field=v1,v2,...");
    Sweep sweep;
    sweep.field = text.substr(0, eq);
    static const std::vector<std::string> kFields{"pe_rows", "pe_cols", "fifo_depth", "read_width",
                                                  "clock_mhz"};
    if (std::find(kFields.begin(), kFields.end(), sweep.field) == kFields.end()) {
        throw ConfigError("cannot sweep '" + sweep.field + "'");
    }
    std::stringstream values(text.substr(eq + 1));
    std::string item;
    while (std::getline(values, item, ',')) {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (ec != std::errc() || ptr != item.data() + item.size()) {
            throw ConfigError("bad sweep value '" + item + "'");
        }
        sweep.values.push_back(v);
    }
    if (sweep.values.empty()) throw ConfigError("sweep has no values");
    return sweep;
}

void write_model(std::ostream& os, const dataflow::PipelineEstimate& e,
                 const dataflow::PipelineGeometry& g, std::uint64_t n_source, std::uint64_t n_target,
                 Format format) {
    switch (format) {
        case Format::json: {
            nlohmann::ordered_json doc;
            doc["geometry"] = {{"pe_rows", g.pe_rows}, {"pe_cols", g.pe_cols}, {"fifo_depth", g.fifo_depth},
                               {"clock_mhz", g.clock_mhz}, {"read_width", g.read_width}};
            doc["n_source"] = n_source;
            doc["n_target"] = n_target;
            doc["per_stage_cycles"] = {{"read", e.per_stage.read}, {"distance", e.per_stage.distance},
                                       {"compare", e.per_stage.compare},
                                       {"accumulate", e.per_stage.accumulate}};
            doc["total_cycles"] = e.total_cycles;
            doc["steady_state_throughput"] = e.steady_state_throughput;
            doc["latency_ms"] = e.latency_ms;
            os << doc.dump(2) << '\n';
            return;
        }
        case Format::csv:
            os << "total_cycles,read,distance,compare,accumulate,latency_ms,throughput\n";
            os << e.total_cycles << ',' << e.per_stage.read << ',' << e.per_stage.distance << ','
               << e.per_stage.compare << ',' << e.per_stage.accumulate << ',' << format_real(e.latency_ms)
               << ',' << format_real(e.steady_state_throughput) << '\n';
            return;
        case Format::text:
            os << "geometry: " << g.pe_rows << "x" << g.pe_cols << " PE, fifo " << g.fifo_depth
               << ", read width " << g.read_width << ", " << g.clock_mhz << " MHz\n";
            os << "workload: " << n_source << " source x " << n_target << " target points\n";
            os << "batches: " << e.batches << ", beats/batch: " << e.beats_per_batch
               << ", active lanes: " << e.active_lanes << ", tree depth: " << e.tree_depth << '\n';
            os << "stage cycles  read: " << e.per_stage.read << "  distance: " << e.per_stage.distance
               << "  compare: " << e.per_stage.compare << "  accumulate: " << e.per_stage.accumulate
               << '\n';
            os << "total cycles: " << e.total_cycles << '\n';
            os << std::fixed << std::setprecision(6)
               << "throughput: " << e.steady_state_throughput << " source points/cycle\n"
               << std::setprecision(3) << "latency: " << e.latency_ms << " ms\n";
            os.unsetf(std::ios::floatfield);
            return;
    }
}

void write_sweep(std::ostream& os, const ModelConfig& base, const Sweep& sweep, std::uint64_t n_source,
                 std::uint64_t n_target) {
    os << "value,total_cycles,read,distance,compare,accumulate,latency_ms,throughput\n";
    for (double v : sweep.values) {
        dataflow::PipelineGeometry g = base.geometry;
        if (sweep.field == "clock_mhz") {
            g.clock_mhz = v;
        } else {
            if (v < 1.0 || v != std::floor(v)) {
                throw ConfigError("sweep values for " + sweep.field + " must be integers >= 1");
            }
            const auto n = static_cast<std::uint64_t>(v);
            if (sweep.field == "pe_rows") g.pe_rows = n;
            if (sweep.field == "pe_cols") g.pe_cols = n;
            if (sweep.field == "fifo_depth") g.fifo_depth = n;
            if (sweep.field == "read_width") g.read_width = n;
        }
        const std::uint64_t cap = dataflow::target_capacity(g, base.coefficients);
        if (n_target > cap) {
            warn("sweep " + sweep.field + "=" + format_real(v) + " skipped: capacity " +
                 std::to_string(cap) + " is below " + std::to_string(n_target) + " target points");
            continue;
        }
        const auto e = dataflow::estimate_pipeline(g, n_source, n_target, base.coefficients);
        os << format_real(v) << ',' << e.total_cycles << ',' << e.per_stage.read << ','
           << e.per_stage.distance << ',' << e.per_stage.compare << ',' << e.per_stage.accumulate << ','
           << format_real(e.latency_ms) << ',' << format_real(e.steady_state_throughput) << '\n';
    }
}

}  // namespace fpps::cli
