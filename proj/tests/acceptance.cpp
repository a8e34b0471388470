#include "perfcharter/cluster.hpp"
#include "perfcharter/roofline.hpp"
#include "perfcharter/sched.hpp"
#include "perfcharter/stats.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <sys/wait.h>

using namespace perfcharter;
namespace fs = std::filesystem;

namespace {

const std::string kData = PERFCHARTER_DATA_DIR;

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    return {std::istreambuf_iterator<char>(in), {}};
}

// Collects failed conditions and soft-check notes for one criterion.
struct Check {
    std::vector<std::string> failures;
    std::vector<std::string> notes;

    void expect(bool ok, const std::string &what) {
        if (!ok && failures.size() < 5) failures.push_back(what);
        if (!ok && failures.size() == 5) failures.push_back("...");
    }
    void soft(bool ok, const std::string &what) { notes.push_back(std::string(ok ? "ok: " : "DEVIATION: ") + what); }
};

int failed = 0;

void criterion(int id, const std::string &title, double budget_s, const std::function<void(Check &)> &body) {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception &e) {
        c.failures.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget_s > 0 && secs >= budget_s) {
        std::ostringstream s;
        s << "took " << secs << " s, budget " << budget_s << " s";
        c.failures.push_back(s.str());
    }
    const bool ok = c.failures.empty();
    if (!ok) ++failed;
    std::printf("criterion %d: %s  %s (%.3f s)\n", id, ok ? "PASS" : "FAIL", title.c_str(), secs);
    for (const auto &f : c.failures) std::printf("    failed: %s\n", f.c_str());
    for (const auto &n : c.notes) std::printf("    soft check %s\n", n.c_str());
}

std::string num(double v) {
    std::ostringstream s;
    s.precision(10);
    s << v;
    return s.str();
}

MetricMatrix make_matrix(const Matrix &values) {
    MetricMatrix m;
    for (std::size_t i = 0; i < values.rows(); ++i) {
        m.workloads.push_back("W" + std::to_string(i));
        m.suites.push_back(Suite::Other);
    }
    for (std::size_t j = 0; j < values.cols(); ++j) m.metrics.push_back("m" + std::to_string(j));
    m.values = values;
    return m;
}

Matrix random_points(std::mt19937_64 &rng, std::size_t n, std::size_t k) {
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    Matrix m(n, k);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) m(i, j) = u(rng);
    return m;
}

std::vector<std::string> names_of(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back("w" + std::to_string(i));
    return out;
}

void intensity_regression(Check &c) {
    const auto records = parse_kernels(slurp(kData + "/appendix_kernels.csv"), Format::Csv);
    auto find = [&](const std::string &name) {
        const auto it = std::ranges::find_if(records, [&](const KernelRecord &r) { return r.class_name == name; });
        if (it == records.end()) throw std::runtime_error("kernel " + name + " missing");
        return kernel_point(*it);
    };
    const auto relu = find("relu"), mm = find("MM_4x1");
    c.expect(std::abs(relu.intensity - 1.27) <= 0.01, "relu intensity " + num(relu.intensity));
    c.expect(std::abs(relu.throughput - 436.29) <= 0.5, "relu throughput " + num(relu.throughput));
    c.expect(std::abs(mm.intensity - 208.98) <= 0.05, "MM_4x1 intensity " + num(mm.intensity));
}

void naive_regression(Check &c) {
    const auto jobs = parse_jobs(slurp(kData + "/jobs_scaling.csv"));
    double hand = 0.0;
    for (const auto &j : jobs) hand += j.t1_minutes / j.speedup.at(4);
    const double m = naive_schedule(jobs, ClusterSpec::with_default_widths(4)).makespan;
    c.expect(std::abs(m - 1490.7) <= 0.5, "naive makespan " + num(m));
    c.expect(std::abs(m - hand) <= 1e-9 * hand, "hand sum " + num(hand) + " vs " + num(m));
}

void scheduler_dominance(Check &c) {
    const auto jobs = parse_jobs(slurp(kData + "/jobs_scaling.csv"));
    std::map<unsigned, double> saved;
    for (unsigned p : {2u, 4u, 8u}) {
        const auto cluster = ClusterSpec::with_default_widths(p);
        const auto naive = naive_schedule(jobs, cluster);
        const auto exact = exact_schedule(jobs, cluster);
        c.expect(validate_schedule(exact, jobs, cluster).empty(), "invalid exact schedule at P=" + std::to_string(p));
        c.expect(exact.makespan < naive.makespan,
                 "P=" + std::to_string(p) + " exact " + num(exact.makespan) + " vs naive " + num(naive.makespan));
        saved[p] = savings(naive, exact);
        c.notes.push_back("P=" + std::to_string(p) + ": naive " + num(naive.makespan) + " min, exact " +
                          num(exact.makespan) + " min, savings " + num(saved[p]) + " min (" +
                          num(saved[p] / 60.0) + " h)");
    }
    c.expect(saved[4] > saved[8], "savings(P=4) " + num(saved[4]) + " <= savings(P=8) " + num(saved[8]));

    const auto c4 = ClusterSpec::with_default_widths(4);
    const auto t0 = std::chrono::steady_clock::now();
    const auto perm = permutation_search(jobs, c4);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.expect(secs < 60.0, "permutation search took " + num(secs) + " s");
    const double exact4 = exact_schedule(jobs, c4).makespan;
    c.expect(exact4 <= perm.schedule.makespan, "exact above permutation at P=4");
    c.notes.push_back("permutation search n=6 P=4: " + num(secs) + " s, " + std::to_string(perm.explored) +
                      " schedules, makespan " + num(perm.schedule.makespan));

    const auto best = exact_schedule(jobs, c4);
    auto width = [&](const std::string &name) {
        return std::ranges::find_if(best.placements, [&](const Placement &p) { return p.job == name; })->width;
    };
    const unsigned mrcnn = width("MRCNN_Py"), tf = width("Res50_TF"), mx = width("Res50_MX");
    c.soft(mrcnn == 2, "MRCNN_Py width " + std::to_string(mrcnn) + " (expected 2)");
    c.soft(tf == 1, "Res50_TF width " + std::to_string(tf) + " (expected 1)");
    c.soft(mx == 1, "Res50_MX width " + std::to_string(mx) + " (expected 1)");
}

void exact_oracle(Check &c) {
    std::mt19937_64 rng(20240601);
    const std::vector<unsigned> all{1, 2, 4};
    for (int trial = 0; trial < 200; ++trial) {
        const unsigned p = 1 + rng() % 4;
        std::vector<unsigned> allowed{1};
        for (unsigned w : all)
            if (w > 1 && w <= p && rng() % 4 != 0) allowed.push_back(w);
        const auto cluster = ClusterSpec::make(p, allowed);
        const auto jobs = oracle::dyadic_jobs(rng, 1 + rng() % 4, allowed);
        const auto s = exact_schedule(jobs, cluster);
        const double brute = oracle::brute_force_makespan(jobs, cluster);
        c.expect(validate_schedule(s, jobs, cluster).empty(), "invalid schedule in trial " + std::to_string(trial));
        c.expect(s.makespan == brute,
                 "trial " + std::to_string(trial) + ": exact " + num(s.makespan) + " vs brute force " + num(brute));
    }

    // Arbitrary real runtimes: equal optima may round differently depending on summation order.
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const unsigned p = 1 + rng() % 4;
        std::vector<unsigned> allowed{1};
        for (unsigned w : all)
            if (w > 1 && w <= p) allowed.push_back(w);
        const auto cluster = ClusterSpec::make(p, allowed);
        const auto jobs = oracle::random_jobs(rng, 1 + rng() % 4, allowed);
        const double brute = oracle::brute_force_makespan(jobs, cluster);
        worst = std::max(worst, std::abs(exact_schedule(jobs, cluster).makespan - brute) / brute);
    }
    c.expect(worst <= 1e-12, "real-valued runtimes: relative gap " + num(worst));
    c.notes.push_back("200 more instances with real-valued runtimes: largest relative gap " + num(worst));
}

void pca_properties(Check &c) {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t m = 1 + rng() % 10;
        const std::size_t n = std::max<std::size_t>(2, 2 + rng() % 19);
        Matrix v(n, m);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) v(i, j) = g(rng) * (1.0 + j) + 3.0 * j;
        const auto data = make_matrix(v);
        const auto model = fit_pca(data);
        const std::size_t k = model.components();
        const std::string tag = " (trial " + std::to_string(trial) + ")";
        c.expect(oracle::max_abs_diff(model.eigenvectors.transposed() * model.eigenvectors, Matrix::identity(k)) < 1e-8,
                 "orthonormality" + tag);
        const auto z = standardize(data).z;
        c.expect(oracle::max_abs_diff(model.projections * model.eigenvectors.transposed(), z) < 1e-8,
                 "reconstruction" + tag);
        double sum = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            sum += model.explained[i];
            if (i > 0) c.expect(model.explained[i] <= model.explained[i - 1], "explained increases" + tag);
        }
        c.expect(std::abs(sum - 1.0) <= 1e-9, "explained sums to " + num(sum) + tag);

        const Matrix a = oracle::random_symmetric(rng, 3);
        const auto e = jacobi_eigen(a);
        const auto roots = oracle::cubic_eigenvalues(a);
        for (int r = 0; r < 3; ++r) c.expect(std::abs(e.values[r] - roots[r]) < 1e-8, "3x3 eigenvalue" + tag);
    }
}

std::set<std::set<std::string>> named(const Clusters &clusters, const std::vector<std::string> &names) {
    std::set<std::set<std::string>> out;
    for (const auto &cl : clusters) {
        std::set<std::string> s;
        for (std::size_t id : cl) s.insert(names[id]);
        out.insert(s);
    }
    return out;
}

void clustering_properties(Check &c) {
    std::mt19937_64 rng(99);
    const Linkage linkages[] = {Linkage::Single, Linkage::Complete, Linkage::Average};
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 2 + rng() % 19;
        const auto names = names_of(n);
        const auto p = random_points(rng, n, 1 + rng() % 4);
        const auto d = pairwise_distances(p);
        const Linkage l = linkages[trial % 3];
        const auto t = agglomerate(d, l, names);
        const std::string tag = " (trial " + std::to_string(trial) + ")";

        for (std::size_t k = 1; k < t.merges.size(); ++k)
            c.expect(t.merges[k - 1].height <= t.merges[k].height, "heights decrease" + tag);

        std::uniform_real_distribution<double> u(0.0, t.merges.back().height * 1.1);
        for (int r = 0; r < 5; ++r) {
            double h1 = u(rng), h2 = u(rng);
            if (h1 > h2) std::swap(h1, h2);
            const auto fine = cut(t, h1), coarse = cut(t, h2);
            std::vector<std::size_t> owner(n);
            for (std::size_t k = 0; k < coarse.size(); ++k)
                for (std::size_t id : coarse[k]) owner[id] = k;
            for (const auto &cl : fine)
                for (std::size_t id : cl) c.expect(owner[id] == owner[cl.front()], "cut refinement" + tag);
        }

        const auto singles = cut_k(t, n).clusters;
        c.expect(singles.size() == n && std::ranges::all_of(singles, [](const auto &x) { return x.size() == 1; }),
                 "cut_k(n) not singletons" + tag);
        c.expect(cut_k(t, 1).clusters.size() == 1, "cut_k(1) not one cluster" + tag);

        const std::size_t k = 1 + rng() % n;
        const auto reps = select_representatives(cut_k(t, k).clusters, d, names);
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        Matrix q(n, p.cols());
        std::vector<std::string> qnames(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < p.cols(); ++j) q(i, j) = p(perm[i], j);
            qnames[i] = names[perm[i]];
        }
        const auto dq = pairwise_distances(q);
        const auto tq = agglomerate(dq, l, qnames);
        const auto qreps = select_representatives(cut_k(tq, k).clusters, dq, qnames);
        c.expect(std::set(reps.begin(), reps.end()) == std::set(qreps.begin(), qreps.end()),
                 "medoids change under row permutation" + tag);
        c.expect(named(cut_k(t, k).clusters, names) == named(cut_k(tq, k).clusters, qnames),
                 "partition changes under row permutation" + tag);
    }
}

void coverage_regression(Check &c) {
    const auto m = parse_profiles(slurp(kData + "/profiles_1xv100.csv"), Format::Csv).matrix;
    for (const auto &r : coverage(m, m.workloads).coverage)
        c.expect(r.low_pct == 0.0 && r.high_pct == 100.0, r.metric + " not (0,100)");

    MetricMatrix flat;
    flat.workloads = {"a", "b", "c"};
    flat.suites = {Suite::Other, Suite::Other, Suite::Other};
    flat.metrics = {"const"};
    flat.values = Matrix(3, 1, 42.0);
    const auto r = coverage(flat, {"b"}).coverage.at(0);
    c.expect(r.degenerate && r.low_pct == 0.0 && r.high_pct == 100.0, "constant metric not flagged (0,100)");
}

void roofline_properties(Check &c) {
    const auto machine = parse_machine(slurp(kData + "/machine_v100.json"));
    for (const auto &[precision, peak] : machine.peaks) {
        double last = 0.0;
        for (double i = 1e-4; i < 1e5; i *= 1.05) {
            const double a = attainable(machine, precision, i);
            c.expect(a >= last, "attainable decreases at " + num(i));
            c.expect(a <= peak, "attainable above peak at " + num(i));
            last = a;
        }
        c.expect(attainable(machine, precision, 1e12) == peak, "not capped at peak");
    }

    const auto records = parse_kernels(slurp(kData + "/appendix_kernels.csv"), Format::Csv);
    for (const auto &r : records) {
        const double a = kernel_point(r, 32).intensity, b = kernel_point(r, 64).intensity;
        c.expect(std::isinf(a) ? std::isinf(b) : b == a / 2.0, r.class_name + " intensity not halved");
    }

    const auto grouped = parse_kernels(slurp(kData + "/appendix_kernels_by_benchmark.csv"), Format::Csv);
    const auto groups = group_by_workload(grouped);
    c.expect(groups.size() == 7, std::to_string(groups.size()) + " workloads");
    std::size_t memory = 0;
    for (const auto &[name, group] : groups) {
        const auto p = workload_point(group, kDefaultTransactionBytes, name);
        const auto b = classify(machine, Precision::Single, p);
        if (b == Boundedness::MemoryBound) ++memory;
        c.soft(b == Boundedness::MemoryBound,
               name + " intensity " + num(p.intensity) + " is " + std::string(to_string(b)));
    }
    c.soft(memory == groups.size(), std::to_string(memory) + " of " + std::to_string(groups.size()) +
                                        " workload points memory_bound");
}

int run_cli(const std::string &args, const std::string &threads) {
    const std::string cmd = "PERF_CHARTER_THREADS=" + threads + " '" + std::string(PERFCHARTER_CLI) + "' " + args +
                            " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> outputs(const fs::path &dir) {
    std::map<std::string, std::string> files;
    for (const auto &e : fs::directory_iterator(dir)) {
        const auto ext = e.path().extension();
        if (ext == ".json" || ext == ".csv") files[e.path().filename().string()] = slurp(e.path());
    }
    return files;
}

void determinism(Check &c) {
    const auto root = fs::temp_directory_path() / "perfcharter_acceptance";
    fs::remove_all(root);
    const std::string inputs = " --profiles " + kData + "/profiles_1xv100.csv --kernels " + kData +
                               "/appendix_kernels_by_benchmark.csv --machine " + kData + "/machine_v100.json --jobs " +
                               kData + "/jobs_scaling.csv --gpus 4";
    for (const std::string method : {"exact", "permutation"}) {
        std::vector<std::map<std::string, std::string>> runs;
        for (const std::string threads : {"1", "8", "1", "8"}) {
            const auto out = root / (method + "_" + std::to_string(runs.size()));
            const int rc = run_cli("report" + inputs + " --method " + method + " --out " + out.string(), threads);
            c.expect(rc == 0, "CLI exit " + std::to_string(rc));
            if (rc != 0) return;
            runs.push_back(outputs(out));
        }
        c.expect(runs[0].size() >= 7, "only " + std::to_string(runs[0].size()) + " JSON/CSV outputs");
        for (std::size_t i = 1; i < runs.size(); ++i)
            for (const auto &[name, text] : runs[0])
                c.expect(runs[i].contains(name) && runs[i].at(name) == text, method + ": " + name + " differs");
    }
    fs::remove_all(root);
}

} // namespace

int main() {
    criterion(1, "intensity regression", 1.0, intensity_regression);
    criterion(2, "naive-schedule regression", 1.0, naive_regression);
    criterion(3, "scheduler dominance and optimal structure", 0.0, scheduler_dominance);
    criterion(4, "exact solver matches brute force", 120.0, exact_oracle);
    criterion(5, "PCA properties", 10.0, pca_properties);
    criterion(6, "clustering properties", 10.0, clustering_properties);
    criterion(7, "coverage regression", 0.0, coverage_regression);
    criterion(8, "roofline properties", 0.0, roofline_properties);
    criterion(9, "determinism across thread counts", 0.0, determinism);
    std::printf("%d of 9 criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
