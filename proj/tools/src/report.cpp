#include "fpps_cli/report.hpp"

#include <charconv>
#include <cmath>
#include <iomanip>
#include <numeric>

#include <json.hpp>

#include "fpps/error.hpp"

namespace fpps::cli {

Format parse_format(const std::string& name) {
    if (name == "text") return Format::text;
    if (name == "csv") return Format::csv;
    if (name == "json") return Format::json;
    throw ConfigError("unknown format '" + name + "' (expected text, csv or json)");
}

std::string format_real(double v) {
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    (void)ec;
    return std::string(buf.data(), ptr);
}

namespace {

template <class F>
double mean_of(const std::vector<FrameRecord>& records, F field) {
    if (records.empty()) return 0.0;
    double sum = 0.0;
    for (const FrameRecord& r : records) sum += field(r);
    return sum / static_cast<double>(records.size());
}

template <class F>
std::optional<double> optional_mean(const std::vector<FrameRecord>& records, F field) {
    if (records.empty()) return std::nullopt;
    double sum = 0.0;
    for (const FrameRecord& r : records) {
        const std::optional<double> v = field(r);
        if (!v) return std::nullopt;
        sum += *v;
    }
    return sum / static_cast<double>(records.size());
}

double shown_latency(const BenchReport& report, const FrameRecord& r) {
    return report.omit_timing ? 0.0 : r.latency_ms;
}

}  // namespace

double BenchReport::average_rmse() const {
    return mean_of(records, [](const FrameRecord& r) { return r.rmse_m; });
}

double BenchReport::average_latency_ms() const {
    return mean_of(records, [](const FrameRecord& r) { return r.latency_ms; });
}

std::optional<double> BenchReport::average_gt_trans_err() const {
    return optional_mean(records, [](const FrameRecord& r) { return r.gt_trans_err_m; });
}

std::optional<double> BenchReport::average_gt_rot_err() const {
    return optional_mean(records, [](const FrameRecord& r) { return r.gt_rot_err_rad; });
}

double speedup(const BenchReport& baseline, const BenchReport& run) {
    const double base = baseline.average_latency_ms();
    const double mine = run.average_latency_ms();
    if (!(base > 0.0) || !(mine > 0.0)) {
        throw Error("speedup needs positive average latencies on both runs");
    }
    return base / mine;
}

void write_csv(std::ostream& os, const BenchReport& report) {
    os << "frame,rmse_m,latency_ms,iterations,converged\n";
    for (const FrameRecord& r : report.records) {
        os << r.frame << ',' << format_real(r.rmse_m) << ',' << format_real(shown_latency(report, r))
           << ',' << r.iterations << ',' << (r.converged ? "true" : "false") << '\n';
    }
}

void write_text(std::ostream& os, const BenchReport& report) {
    const bool gt = report.average_gt_trans_err().has_value();
    os << "backend: " << report.backend << '\n';
    os << std::left << std::setw(8) << "frame" << std::right << std::setw(12) << "rmse_m"
       << std::setw(14) << "latency_ms";
    if (report.include_io) os << std::setw(10) << "io_ms";
    os << std::setw(12) << "iterations" << std::setw(11) << "converged";
    if (gt) os << std::setw(16) << "gt_trans_err_m" << std::setw(16) << "gt_rot_err_rad";
    os << '\n';

    os << std::fixed;
    for (const FrameRecord& r : report.records) {
        os << std::left << std::setw(8) << r.frame << std::right << std::setprecision(6)
           << std::setw(12) << r.rmse_m << std::setprecision(3) << std::setw(14)
           << shown_latency(report, r);
        if (report.include_io) os << std::setw(10) << (report.omit_timing ? 0.0 : r.io_ms);
        os << std::setw(12) << r.iterations << std::setw(11) << (r.converged ? "yes" : "no");
        if (gt) {
            os << std::setprecision(6) << std::setw(16) << *r.gt_trans_err_m << std::setw(16)
               << *r.gt_rot_err_rad;
        }
        os << '\n';
    }
    os << std::setprecision(6) << "average rmse_m: " << report.average_rmse() << '\n';
    if (!report.omit_timing) {
        os << std::setprecision(3) << "average latency_ms: " << report.average_latency_ms() << '\n';
    }
    if (report.speedup && report.baseline) {
        os << std::setprecision(2) << "speedup vs " << *report.baseline << ": " << *report.speedup
           << "x\n";
    }
    if (gt) {
        os << std::setprecision(6)
           << "trajectory error vs ground-truth poses (mean translation m / rotation rad): "
           << *report.average_gt_trans_err() << " / " << *report.average_gt_rot_err() << '\n';
    }
    os.unsetf(std::ios::floatfield);
}

void write_json(std::ostream& os, const BenchReport& report) {
    using nlohmann::ordered_json;
    ordered_json doc;
    doc["backend"] = report.backend;
    ordered_json frames = ordered_json::array();
    for (const FrameRecord& r : report.records) {
        ordered_json f;
        f["frame"] = r.frame;
        f["rmse_m"] = r.rmse_m;
        f["latency_ms"] = shown_latency(report, r);
        if (report.include_io) f["io_ms"] = report.omit_timing ? 0.0 : r.io_ms;
        f["iterations"] = r.iterations;
        f["converged"] = r.converged;
        ordered_json rows = ordered_json::array();
        const auto m = r.transform.matrix4();
        for (std::size_t i = 0; i < 4; ++i) {
            rows.push_back({m[4 * i], m[4 * i + 1], m[4 * i + 2], m[4 * i + 3]});
        }
        f["transform"] = rows;
        if (r.gt_trans_err_m) f["gt_trans_err_m"] = *r.gt_trans_err_m;
        if (r.gt_rot_err_rad) f["gt_rot_err_rad"] = *r.gt_rot_err_rad;
        frames.push_back(f);
    }
    doc["frames"] = frames;
    ordered_json agg;
    agg["frames"] = report.records.size();
    agg["average_rmse_m"] = report.average_rmse();
    agg["average_latency_ms"] = report.omit_timing ? 0.0 : report.average_latency_ms();
    if (report.speedup && report.baseline && !report.omit_timing) {
        agg["baseline"] = *report.baseline;
        agg["speedup"] = *report.speedup;
    }
    if (auto t = report.average_gt_trans_err()) agg["average_gt_trans_err_m"] = *t;
    if (auto r = report.average_gt_rot_err()) agg["average_gt_rot_err_rad"] = *r;
    doc["aggregates"] = agg;
    os << doc.dump(2) << '\n';
}

}  // namespace fpps::cli
