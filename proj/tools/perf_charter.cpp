#include "perfcharter/cluster.hpp"
#include "perfcharter/error.hpp"
#include "perfcharter/model.hpp"
#include "perfcharter/report.hpp"
#include "perfcharter/roofline.hpp"
#include "perfcharter/sched.hpp"
#include "perfcharter/stats.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace perfcharter;

namespace {

constexpr int kExitParse = 2;
constexpr int kExitAnalysis = 3;
constexpr int kExitSearchSpace = 4;

struct Exit {
    int code;
    std::string message;
};

struct Outcome {
    std::vector<std::pair<std::string, std::string>> files;
    std::string report;
};

unsigned worker_count() {
    if (const char *env = std::getenv("PERF_CHARTER_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v >= 1) return static_cast<unsigned>(v);
        } catch (const std::exception &) {
        }
        std::cerr << "warning: ignoring PERF_CHARTER_THREADS='" << env << "'\n";
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

Format format_of(const fs::path &path) {
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".json" ? Format::Json : Format::Csv;
}

std::string slurp(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Runs an input-loading step; any failure there is a parse error.
template <class F>
auto load(F &&f) {
    try {
        return f();
    } catch (const Error &e) {
        throw Exit{kExitParse, e.what()};
    }
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

// --- characterize -----------------------------------------------------------

struct CharacterizeArgs {
    std::string profiles;
    std::string linkage = "average";
    double cut_height = -1.0;
    std::size_t k = 0;
    std::string space = "metric";
};

Outcome characterize(const CharacterizeArgs &args) {
    const auto parsed = load([&] { return parse_profiles(slurp(args.profiles), format_of(args.profiles)); });
    const Linkage linkage = load([&] { return parse_linkage(args.linkage); });
    std::size_t pcs = 0;
    if (args.space != "metric") {
        if (args.space.rfind("pca:", 0) != 0)
            throw Exit{kExitParse, "--space must be 'metric' or 'pca:<k>'"};
        try {
            pcs = std::stoul(args.space.substr(4));
        } catch (const std::exception &) {
            throw Exit{kExitParse, "--space pca:<k> needs a positive integer"};
        }
        if (pcs == 0) throw Exit{kExitParse, "--space pca:<k> needs k >= 1"};
    }

    const MetricMatrix &matrix = parsed.matrix;
    const PcaModel model = fit_pca(matrix);
    const auto z = standardize(matrix);

    Matrix points;
    if (pcs == 0) {
        points = z.z;
    } else {
        if (pcs > model.components())
            throw Error(ErrorKind::IndexOutOfRange, "only " + std::to_string(model.components()) + " components");
        points = Matrix(matrix.rows(), pcs);
        for (std::size_t r = 0; r < matrix.rows(); ++r)
            for (std::size_t c = 0; c < pcs; ++c) points(r, c) = model.projections(r, c);
    }
    const Matrix dist = pairwise_distances(points, worker_count());
    const Dendrogram tree = agglomerate(dist, linkage, matrix.workloads);

    Clusters clusters;
    double threshold = 0.0;
    if (args.cut_height >= 0.0) {
        clusters = cut(tree, args.cut_height);
        threshold = args.cut_height;
    } else {
        auto kc = cut_k(tree, args.k == 0 ? std::min<std::size_t>(4, matrix.rows()) : args.k);
        clusters = std::move(kc.clusters);
        threshold = kc.threshold;
    }
    const auto selected = select_representatives(clusters, dist, matrix.workloads);
    const SubsetReport subset = coverage(matrix, selected);

    std::ostringstream out;
    out << "workloads: " << matrix.rows() << "  metrics: " << matrix.cols() << "\n";
    for (const auto &d : parsed.dropped) out << "dropped (missing values): " << d << "\n";
    for (const auto &d : model.dropped) out << "dropped (zero variance): " << d << "\n";
    out << "\nprincipal components\n";
    const auto cumulative = cumulative_explained(model);
    for (std::size_t pc = 0; pc < model.components(); ++pc) {
        const auto dom = dominant_metric(model, pc);
        out << "  PC" << pc + 1 << "  eigenvalue " << pad(format_sig(model.eigenvalues[pc]), 12) << " explained "
            << pad(format_sig(100.0 * model.explained[pc]) + "%", 10) << " cumulative "
            << pad(format_sig(100.0 * cumulative[pc]) + "%", 10) << " dominant " << dom.metric << " ("
            << format_sig(dom.loading) << ")\n";
    }
    out << "\nlinkage " << to_string(linkage) << ", space " << args.space << ", " << clusters.size()
        << " clusters (threshold " << format_sig(threshold) << ")\n";
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        out << "  [" << c + 1 << "] ";
        for (std::size_t i = 0; i < clusters[c].size(); ++i)
            out << (i ? ", " : "") << matrix.workloads[clusters[c][i]];
        out << "  -> " << selected[c] << "\n";
    }
    out << "\nselected subset:";
    for (const auto &s : selected) out << " " << s;
    out << "\n\ncoverage of the full range\n";
    for (const auto &r : subset.coverage) {
        out << "  " << pad(r.metric, 24) << format_sig(r.low_pct) << "% ~ " << format_sig(r.high_pct) << "%"
            << (r.degenerate ? "  (constant)" : "") << "\n";
    }

    Outcome o;
    o.files.emplace_back("pca.json", pca_json(model));
    o.files.emplace_back("dendrogram.json", dendrogram_json(tree, linkage));
    o.files.emplace_back("dendrogram.svg", dendrogram_svg(tree, std::isfinite(threshold) ? threshold : -1.0));
    o.files.emplace_back("subset_report.json", subset_report_json(subset, clusters, matrix.workloads, threshold));
    o.report = out.str();
    return o;
}

// --- roofline ---------------------------------------------------------------

struct RooflineArgs {
    std::string kernels;
    std::string machine;
    std::uint64_t transaction_bytes = kDefaultTransactionBytes;
    std::string precision = "single";
};

Outcome roofline(const RooflineArgs &args) {
    const auto records = load([&] { return parse_kernels(slurp(args.kernels), format_of(args.kernels)); });
    const MachineModel machine = load([&] { return parse_machine(slurp(args.machine)); });
    const Precision precision = load([&] { return parse_precision(args.precision); });
    if (args.transaction_bytes == 0) throw Exit{kExitParse, "--transaction-bytes must be > 0"};

    std::vector<RooflinePoint> kernel_points;
    for (const auto &r : records) {
        auto p = kernel_point(r, args.transaction_bytes, precision);
        if (!r.workload.empty()) p.name = r.workload + "/" + p.name;
        kernel_points.push_back(std::move(p));
    }
    std::vector<RooflinePoint> workload_points;
    for (const auto &[name, group] : group_by_workload(records))
        workload_points.push_back(workload_point(group, args.transaction_bytes, name, precision));

    std::ostringstream out;
    out << "machine: " << machine.name << "\n";
    for (const auto &w : machine.warnings()) std::cerr << "warning: " << w << "\n";
    for (const auto &[p, peak] : machine.peaks)
        out << "  " << pad(std::string(to_string(p)), 8) << "peak " << pad(format_sig(peak) + " GFLOP/s", 16)
            << "ridge " << format_sig(machine.ridge(p)) << " FLOPs/Byte\n";
    out << "  memory bandwidth " << format_sig(machine.mem_bandwidth_gbps) << " GB/s\n";
    out << "\nkernel records: " << records.size() << ", transaction size " << args.transaction_bytes << " B\n";
    out << "\nworkload points (" << to_string(precision) << ")\n";
    for (const auto &p : workload_points) {
        const double roof = attainable(machine, precision, p.intensity);
        out << "  " << pad(p.name, 14) << "intensity " << pad(format_sig(p.intensity), 10) << " throughput "
            << pad(format_sig(p.throughput), 10) << " attainable " << pad(format_sig(roof), 10) << " "
            << to_string(classify(machine, precision, p)) << (p.throughput > roof ? "  (above roof)" : "") << "\n";
    }

    Outcome o;
    o.files.emplace_back("roofline.csv", roofline_csv(kernel_points, machine));
    o.files.emplace_back("roofline_workloads.csv", roofline_csv(workload_points, machine));
    o.files.emplace_back("roofline.svg", roofline_svg(workload_points, machine));
    o.report = out.str();
    return o;
}

// --- schedule ---------------------------------------------------------------

struct ScheduleArgs {
    std::string jobs;
    unsigned gpus = 0;
    std::vector<unsigned> widths;
    std::string method = "exact";
    std::size_t limit = 0;
};

Outcome schedule(const ScheduleArgs &args) {
    const auto jobs = load([&] { return parse_jobs(slurp(args.jobs), format_of(args.jobs)); });
    const ClusterSpec cluster = load([&] {
        return args.widths.empty() ? ClusterSpec::with_default_widths(args.gpus) : ClusterSpec::make(args.gpus, args.widths);
    });

    const Schedule naive = naive_schedule(jobs, cluster);
    Schedule best;
    std::string extra;
    if (args.method == "exact") {
        ExactStats stats;
        best = exact_schedule(jobs, cluster, args.limit ? args.limit : kExactLimit, &stats);
        extra = std::to_string(stats.nodes) + " nodes explored";
    } else if (args.method == "permutation") {
        auto r = permutation_search(jobs, cluster, args.limit ? args.limit : kPermutationLimit, worker_count());
        best = std::move(r.schedule);
        extra = std::to_string(r.explored) + " schedules explored";
    } else if (args.method == "heuristic") {
        best = heuristic_schedule(jobs, cluster);
    } else {
        throw Exit{kExitParse, "unknown method '" + args.method + "'"};
    }
    const double saved = savings(naive, best);

    std::ostringstream out;
    out << "jobs: " << jobs.size() << "  GPUs: " << cluster.gpu_count << "  widths:";
    for (unsigned w : cluster.widths) out << " " << w;
    out << "\n\nnaive makespan       " << pad(format_sig(naive.makespan) + " min", 16) << "("
        << format_sig(naive.makespan / 60.0) << " h)\n";
    out << pad(args.method + " makespan", 21) << pad(format_sig(best.makespan) + " min", 16) << "("
        << format_sig(best.makespan / 60.0) << " h)" << (extra.empty() ? "" : ", " + extra) << "\n";
    out << "savings              " << pad(format_sig(saved) + " min", 16) << "(" << format_sig(saved / 60.0)
        << " h)\n\n";
    out << "placements\n";
    for (const auto &p : best.placements) {
        out << "  " << pad(p.job, 12) << "width " << p.width << "  gpus";
        for (unsigned g : p.gpu_ids) out << " " << g;
        out << "  " << format_sig(p.start) << " -> " << format_sig(p.end) << " min\n";
    }
    out << "\n" << render_gantt_ascii(best);

    Outcome o;
    o.files.emplace_back("schedule.json", schedule_json(best));
    o.files.emplace_back("naive_schedule.json", schedule_json(naive));
    o.files.emplace_back("gantt.svg", gantt_svg(best));
    o.report = out.str();
    return o;
}

void write_outputs(const fs::path &dir, const Outcome &outcome) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw Exit{kExitParse, "cannot create output directory '" + dir.string() + "'"};
    try {
        for (const auto &[name, content] : outcome.files) write_atomic(dir / name, content);
    } catch (const Error &e) {
        throw Exit{kExitParse, e.what()};
    }
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Workload characterization, roofline placement and moldable-job scheduling"};
    app.name("perf-charter");
    app.require_subcommand(1);

    std::string out_dir;

    CharacterizeArgs ca;
    auto *characterize_cmd = app.add_subcommand("characterize", "PCA, dendrogram and representative subset");
    characterize_cmd->add_option("--profiles", ca.profiles, "profiles.csv or .json")->required();
    characterize_cmd->add_option("--linkage", ca.linkage, "average|avg|single|complete")->capture_default_str();
    auto *cut_opt = characterize_cmd->add_option("--cut", ca.cut_height, "cut the dendrogram at this height");
    auto *k_opt = characterize_cmd->add_option("--k", ca.k, "number of clusters (default 4)");
    cut_opt->excludes(k_opt);
    characterize_cmd->add_option("--space", ca.space, "metric or pca:<k>")->capture_default_str();
    characterize_cmd->add_option("--out", out_dir, "output directory")->required();

    RooflineArgs ra;
    auto *roofline_cmd = app.add_subcommand("roofline", "intensity, throughput and boundedness");
    roofline_cmd->add_option("--kernels", ra.kernels, "kernels.csv or .json")->required();
    roofline_cmd->add_option("--machine", ra.machine, "machine.json")->required();
    roofline_cmd->add_option("--transaction-bytes", ra.transaction_bytes)->capture_default_str();
    roofline_cmd->add_option("--precision", ra.precision, "double|single|half")->capture_default_str();
    roofline_cmd->add_option("--out", out_dir, "output directory")->required();

    ScheduleArgs sa;
    auto *schedule_cmd = app.add_subcommand("schedule", "naive vs searched schedule of moldable jobs");
    schedule_cmd->add_option("--jobs", sa.jobs, "jobs.csv or .json")->required();
    schedule_cmd->add_option("--gpus", sa.gpus, "GPU count")->required()->check(CLI::PositiveNumber);
    schedule_cmd->add_option("--widths", sa.widths, "allowed widths, e.g. 1,2,4,8")->delimiter(',');
    schedule_cmd->add_option("--method", sa.method, "exact|permutation|heuristic")
        ->capture_default_str()
        ->check(CLI::IsMember({"exact", "permutation", "heuristic"}));
    schedule_cmd->add_option("--limit", sa.limit, "maximum job count for the search");
    schedule_cmd->add_option("--out", out_dir, "output directory")->required();

    auto *report_cmd = app.add_subcommand("report", "characterize, roofline and schedule in one run");
    report_cmd->add_option("--profiles", ca.profiles)->required();
    report_cmd->add_option("--kernels", ra.kernels)->required();
    report_cmd->add_option("--machine", ra.machine)->required();
    report_cmd->add_option("--jobs", sa.jobs)->required();
    report_cmd->add_option("--gpus", sa.gpus)->required()->check(CLI::PositiveNumber);
    report_cmd->add_option("--k", ca.k);
    report_cmd->add_option("--method", sa.method)->check(CLI::IsMember({"exact", "permutation", "heuristic"}));
    report_cmd->add_option("--out", out_dir)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kExitParse;
    }

    try {
        Outcome outcome;
        if (*characterize_cmd) {
            outcome = characterize(ca);
        } else if (*roofline_cmd) {
            outcome = roofline(ra);
        } else if (*schedule_cmd) {
            outcome = schedule(sa);
        } else {
            for (auto part : {characterize(ca), roofline(ra), schedule(sa)}) {
                outcome.files.insert(outcome.files.end(), part.files.begin(), part.files.end());
                outcome.report += part.report + "\n";
            }
            outcome.files.emplace_back("report.txt", outcome.report);
        }
        write_outputs(out_dir, outcome);
        std::cout << outcome.report;
        return 0;
    } catch (const Exit &e) {
        std::cerr << "perf-charter: " << e.message << "\n";
        return e.code;
    } catch (const Error &e) {
        std::cerr << "perf-charter: " << e.what() << "\n";
        return e.kind() == ErrorKind::SearchSpaceTooLarge ? kExitSearchSpace : kExitAnalysis;
    } catch (const std::exception &e) {
        std::cerr << "perf-charter: " << e.what() << "\n";
        return kExitAnalysis;
    }
}
