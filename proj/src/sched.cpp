#include "perfcharter/sched.hpp"

#include "parallel.hpp"
#include "perfcharter/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>

namespace perfcharter {

ClusterSpec ClusterSpec::with_default_widths(unsigned gpu_count) {
    if (gpu_count == 0) throw Error(ErrorKind::InvalidArgument, "gpu_count must be >= 1");
    ClusterSpec spec{gpu_count, {}};
    for (unsigned w = 1; w <= gpu_count; w *= 2) spec.widths.push_back(w);
    return spec;
}

ClusterSpec ClusterSpec::make(unsigned gpu_count, std::vector<unsigned> widths) {
    if (gpu_count == 0) throw Error(ErrorKind::InvalidArgument, "gpu_count must be >= 1");
    std::sort(widths.begin(), widths.end());
    widths.erase(std::unique(widths.begin(), widths.end()), widths.end());
    if (widths.empty() || widths.front() != 1)
        throw Error(ErrorKind::InvalidArgument, "allowed widths must include 1");
    if (widths.back() > gpu_count)
        throw Error(ErrorKind::UnsupportedWidth,
                    "width " + std::to_string(widths.back()) + " exceeds " + std::to_string(gpu_count) + " GPUs");
    return ClusterSpec{gpu_count, std::move(widths)};
}

bool ClusterSpec::allows(unsigned width) const {
    return std::binary_search(widths.begin(), widths.end(), width);
}

double runtime(const Job &job, unsigned width) {
    const auto it = job.speedup.find(width);
    if (it == job.speedup.end())
        throw Error(ErrorKind::UnsupportedWidth, "job '" + job.name + "' has no speedup for width " + std::to_string(width));
    return job.t1_minutes / it->second;
}

double scaling_efficiency(const Job &job, unsigned width) {
    const auto it = job.speedup.find(width);
    if (it == job.speedup.end())
        throw Error(ErrorKind::UnsupportedWidth, "job '" + job.name + "' has no speedup for width " + std::to_string(width));
    return it->second / static_cast<double>(width);
}

namespace {

void check_width(const Job &job, unsigned width, const ClusterSpec &cluster) {
    if (!cluster.allows(width) || !job.speedup.contains(width))
        throw Error(ErrorKind::UnsupportedWidth,
                    "job '" + job.name + "' cannot run on " + std::to_string(width) + " GPUs");
}

// Hands out concrete GPU ids, lowest free index first, in placement order.
// Placements must already be sorted by start time.
void assign_gpus(std::vector<Placement> &placements, unsigned gpu_count) {
    std::vector<double> busy_until(gpu_count, 0.0);
    for (auto &p : placements) {
        p.gpu_ids.clear();
        for (unsigned g = 0; g < gpu_count && p.gpu_ids.size() < p.width; ++g) {
            if (busy_until[g] <= p.start) {
                p.gpu_ids.push_back(g);
                busy_until[g] = p.end;
            }
        }
        if (p.gpu_ids.size() != p.width)
            throw Error(ErrorKind::InvalidArgument, "placement of '" + p.job + "' does not fit");
    }
}

Schedule finish(std::vector<Placement> placements, unsigned gpu_count, std::string method) {
    assign_gpus(placements, gpu_count);
    Schedule s{gpu_count, std::move(placements), 0.0, std::move(method)};
    for (const auto &p : s.placements) s.makespan = std::max(s.makespan, p.end);
    return s;
}

// Widths a job can actually use on this cluster, ascending.
std::vector<unsigned> usable_widths(const Job &job, const ClusterSpec &cluster) {
    std::vector<unsigned> out;
    for (unsigned w : cluster.widths)
        if (job.speedup.contains(w)) out.push_back(w);
    return out;
}

// Allocation-free list-scheduling simulation used inside the searches.
// Returns the makespan; fills `starts` when given.
double simulate(std::size_t n, const double *run, const unsigned *width, const std::size_t *priority,
                unsigned gpu_count, double *starts = nullptr) {
    constexpr std::size_t kMax = 64;
    bool started[kMax] = {};
    double running_end[kMax];
    unsigned running_width[kMax];
    std::size_t running = 0;
    unsigned free = gpu_count;
    double now = 0.0, makespan = 0.0;
    std::size_t remaining = n;

    while (remaining > 0) {
        for (std::size_t k = 0; k < n && free > 0; ++k) {
            const std::size_t j = priority[k];
            if (started[j] || width[j] > free) continue;
            started[j] = true;
            --remaining;
            free -= width[j];
            const double end = now + run[j];
            if (starts) starts[j] = now;
            running_end[running] = end;
            running_width[running] = width[j];
            ++running;
            makespan = std::max(makespan, end);
        }
        if (remaining == 0) break;
        double next = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < running; ++r) next = std::min(next, running_end[r]);
        now = next;
        for (std::size_t r = 0; r < running;) {
            if (running_end[r] <= now) {
                free += running_width[r];
                running_end[r] = running_end[running - 1];
                running_width[r] = running_width[running - 1];
                --running;
            } else {
                ++r;
            }
        }
    }
    return makespan;
}

Schedule materialize(std::span<const Job> jobs, std::span<const unsigned> widths, std::span<const double> starts,
                     unsigned gpu_count, std::string method) {
    std::vector<std::size_t> order(jobs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return starts[a] < starts[b]; });
    std::vector<Placement> placements;
    for (std::size_t j : order) {
        const double start = starts[j];
        placements.push_back({jobs[j].name, widths[j], {}, start, start + runtime(jobs[j], widths[j])});
    }
    return finish(std::move(placements), gpu_count, std::move(method));
}

} // namespace

Schedule naive_schedule(std::span<const Job> jobs, const ClusterSpec &cluster) {
    const unsigned width = cluster.max_width();
    std::vector<Placement> placements;
    double now = 0.0;
    for (const auto &job : jobs) {
        check_width(job, width, cluster);
        const double end = now + runtime(job, width);
        placements.push_back({job.name, width, {}, now, end});
        now = end;
    }
    return finish(std::move(placements), cluster.gpu_count, "naive");
}

Schedule list_schedule(std::span<const Job> jobs, std::span<const unsigned> widths,
                       std::span<const std::size_t> priority, const ClusterSpec &cluster) {
    const std::size_t n = jobs.size();
    if (widths.size() != n || priority.size() != n)
        throw Error(ErrorKind::InvalidArgument, "widths and priority must have one entry per job");
    std::vector<bool> seen(n, false);
    for (std::size_t j : priority) {
        if (j >= n || seen[j]) throw Error(ErrorKind::InvalidArgument, "priority is not a permutation of the jobs");
        seen[j] = true;
    }
    if (n > 64) throw Error(ErrorKind::SearchSpaceTooLarge, "list_schedule supports at most 64 jobs");
    std::vector<double> run(n), starts(n);
    for (std::size_t j = 0; j < n; ++j) {
        check_width(jobs[j], widths[j], cluster);
        run[j] = runtime(jobs[j], widths[j]);
    }
    simulate(n, run.data(), widths.data(), priority.data(), cluster.gpu_count, starts.data());
    return materialize(jobs, widths, starts, cluster.gpu_count, "list");
}

Schedule list_schedule(std::span<const Job> jobs, std::span<const unsigned> widths, const ClusterSpec &cluster) {
    std::vector<std::size_t> priority(jobs.size());
    std::iota(priority.begin(), priority.end(), 0);
    return list_schedule(jobs, widths, priority, cluster);
}

SearchResult permutation_search(std::span<const Job> jobs, const ClusterSpec &cluster, std::size_t limit,
                                unsigned threads) {
    const std::size_t n = jobs.size();
    std::vector<std::vector<unsigned>> choices(n);
    long double assignments = 1.0L;
    for (std::size_t j = 0; j < n; ++j) {
        choices[j] = usable_widths(jobs[j], cluster);
        if (choices[j].empty())
            throw Error(ErrorKind::UnsupportedWidth, "job '" + jobs[j].name + "' has no usable width");
        assignments *= static_cast<long double>(choices[j].size());
    }
    if (n > limit) {
        long double bound = assignments;
        for (std::size_t k = 2; k <= n; ++k) bound *= static_cast<long double>(k);
        std::ostringstream msg;
        msg << n << " jobs exceed the limit of " << limit << "; search space would be " << static_cast<double>(bound)
            << " schedules";
        throw Error(ErrorKind::SearchSpaceTooLarge, msg.str());
    }

    SearchResult result;
    if (n == 0) {
        result.schedule = Schedule{cluster.gpu_count, {}, 0.0, "permutation"};
        return result;
    }

    const auto total = static_cast<std::uint64_t>(assignments);
    std::vector<std::vector<double>> run(n);
    for (std::size_t j = 0; j < n; ++j)
        for (unsigned w : choices[j]) run[j].push_back(runtime(jobs[j], w));

    struct Best {
        double makespan = std::numeric_limits<double>::infinity();
        std::vector<std::size_t> digits;
        std::vector<std::size_t> priority;
        std::uint64_t explored = 0;
    };
    const unsigned workers = std::max(1u, threads);
    std::vector<Best> best(std::min<std::uint64_t>(workers, total));

    detail::parallel_blocks(total, workers, [&](std::size_t worker, std::size_t begin, std::size_t end) {
        Best local;
        std::vector<std::size_t> digits(n);
        std::vector<double> rt(n);
        std::vector<unsigned> width(n);
        std::vector<std::size_t> perm(n);
        for (std::size_t index = begin; index < end; ++index) {
            // Mixed-radix decode; job 0 is the most significant digit.
            std::size_t rest = index;
            for (std::size_t j = n; j-- > 0;) {
                digits[j] = rest % choices[j].size();
                rest /= choices[j].size();
                width[j] = choices[j][digits[j]];
                rt[j] = run[j][digits[j]];
            }
            std::iota(perm.begin(), perm.end(), 0);
            do {
                ++local.explored;
                const double makespan = simulate(n, rt.data(), width.data(), perm.data(), cluster.gpu_count);
                if (makespan < local.makespan) {
                    local.makespan = makespan;
                    local.digits = digits;
                    local.priority = perm;
                }
            } while (std::next_permutation(perm.begin(), perm.end()));
        }
        best[worker] = std::move(local);
    });

    // Blocks are contiguous and in order, so the first strict minimum is the
    // lexicographically smallest one.
    const Best *winner = &best.front();
    for (const auto &b : best) {
        result.explored += b.explored;
        if (b.makespan < winner->makespan) winner = &b;
    }
    for (std::size_t j = 0; j < n; ++j) result.widths.push_back(choices[j][winner->digits[j]]);
    result.priority = winner->priority;
    result.schedule = list_schedule(jobs, result.widths, result.priority, cluster);
    result.schedule.method = "permutation";
    return result;
}

Schedule heuristic_schedule(std::span<const Job> jobs, const ClusterSpec &cluster) {
    const std::size_t n = jobs.size();
    if (n == 0) return Schedule{cluster.gpu_count, {}, 0.0, "heuristic"};

    std::vector<std::vector<unsigned>> choices(n);
    for (std::size_t j = 0; j < n; ++j) {
        choices[j] = usable_widths(jobs[j], cluster);
        if (choices[j].empty())
            throw Error(ErrorKind::UnsupportedWidth, "job '" + jobs[j].name + "' has no usable width");
    }

    std::optional<Schedule> best;
    auto consider = [&](Schedule candidate) {
        if (!best || candidate.makespan < best->makespan) best = std::move(candidate);
    };

    // Everything at max width, input order. Equivalent to or better than naive.
    bool all_max = true;
    for (std::size_t j = 0; j < n; ++j) all_max = all_max && jobs[j].speedup.contains(cluster.max_width());
    if (all_max) {
        std::vector<unsigned> widths(n, cluster.max_width());
        consider(list_schedule(jobs, widths, cluster));
    }

    for (unsigned cap : cluster.widths) {
        std::vector<unsigned> widths(n);
        std::vector<double> run(n);
        for (std::size_t j = 0; j < n; ++j) {
            widths[j] = choices[j].front();
            for (unsigned w : choices[j])
                if (w <= cap && runtime(jobs[j], w) < runtime(jobs[j], widths[j])) widths[j] = w;
            run[j] = runtime(jobs[j], widths[j]);
        }
        std::vector<std::size_t> priority(n);
        std::iota(priority.begin(), priority.end(), 0);
        std::stable_sort(priority.begin(), priority.end(),
                         [&](std::size_t a, std::size_t b) { return run[a] > run[b]; });
        consider(list_schedule(jobs, widths, priority, cluster));
    }
    best->method = "heuristic";
    return *best;
}

namespace {

// Branch and bound over placements built in (start, job index) order. A job
// may start at the previous start or at any later end time where its width
// fits. Left-shifting an optimal schedule until nothing moves puts every start
// at 0 or at an earlier job's end, so these sequences cover an optimum.
class ExactSolver {
public:
    ExactSolver(std::span<const Job> jobs, const ClusterSpec &cluster) : n_(jobs.size()), gpus_(cluster.gpu_count) {
        for (const auto &job : jobs) {
            Options o;
            for (unsigned w : usable_widths(job, cluster)) {
                o.widths.push_back(w);
                o.runtimes.push_back(runtime(job, w));
            }
            if (o.widths.empty())
                throw Error(ErrorKind::UnsupportedWidth, "job '" + job.name + "' has no usable width");
            o.min_runtime = *std::min_element(o.runtimes.begin(), o.runtimes.end());
            o.min_area = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < o.widths.size(); ++k)
                o.min_area = std::min(o.min_area, o.widths[k] * o.runtimes[k]);
            options_.push_back(std::move(o));
        }
        start_.assign(n_, 0.0);
        end_.assign(n_, 0.0);
        width_.assign(n_, 0);
        placed_.assign(n_, false);
    }

    void seed(const std::vector<double> &starts, const std::vector<unsigned> &widths, double makespan) {
        best_makespan_ = makespan;
        best_start_ = starts;
        best_width_ = widths;
    }

    void run() {
        double remaining_area = 0.0;
        for (const auto &o : options_) remaining_area += o.min_area;
        branch(0, 0.0, n_, 0.0, 0.0, remaining_area);
    }

    [[nodiscard]] const std::vector<double> &best_start() const { return best_start_; }
    [[nodiscard]] const std::vector<unsigned> &best_width() const { return best_width_; }
    [[nodiscard]] std::uint64_t nodes() const { return nodes_; }

private:
    struct Options {
        std::vector<unsigned> widths;
        std::vector<double> runtimes;
        double min_runtime = 0.0;
        double min_area = 0.0;
    };
    struct Child {
        double bound;
        double start;
        std::size_t job;
        std::size_t option;
    };

    void branch(std::size_t depth, double last_start, std::size_t last_job, double placed_area, double makespan,
                double remaining_area) {
        ++nodes_;
        if (depth == n_) {
            if (makespan < best_makespan_) {
                best_makespan_ = makespan;
                best_start_ = start_;
                best_width_ = width_;
            }
            return;
        }

        // Candidate start times at or after the last start: the last start
        // itself and every end after it. Usage can only drop from there on.
        std::vector<double> times{last_start};
        for (std::size_t j = 0; j < n_; ++j)
            if (placed_[j] && end_[j] > last_start) times.push_back(end_[j]);
        std::sort(times.begin(), times.end());
        times.erase(std::unique(times.begin(), times.end()), times.end());
        std::vector<unsigned> usage(times.size(), 0);
        for (std::size_t t = 0; t < times.size(); ++t)
            for (std::size_t j = 0; j < n_; ++j)
                if (placed_[j] && start_[j] <= times[t] && times[t] < end_[j]) usage[t] += width_[j];

        std::vector<Child> children;
        for (std::size_t j = 0; j < n_; ++j) {
            if (placed_[j]) continue;
            const auto &o = options_[j];
            double longest_other = 0.0;
            for (std::size_t r = 0; r < n_; ++r)
                if (!placed_[r] && r != j) longest_other = std::max(longest_other, options_[r].min_runtime);
            for (std::size_t k = 0; k < o.widths.size(); ++k) {
                const double area = placed_area + o.widths[k] * o.runtimes[k] + remaining_area - o.min_area;
                for (std::size_t t = 0; t < times.size(); ++t) {
                    if (usage[t] + o.widths[k] > gpus_) continue;
                    const double s = times[t];
                    if (s == last_start && last_job != n_ && j < last_job) continue;
                    const double bound = std::max({makespan, s + o.runtimes[k], s + longest_other, area / gpus_});
                    if (bound >= best_makespan_) break;  // later starts only raise the bound
                    children.push_back({bound, s, j, k});
                }
            }
        }
        std::sort(children.begin(), children.end(), [](const Child &a, const Child &b) {
            if (a.bound != b.bound) return a.bound < b.bound;
            if (a.job != b.job) return a.job < b.job;
            return a.option < b.option;
        });

        for (const auto &c : children) {
            if (c.bound >= best_makespan_) continue;
            const auto &o = options_[c.job];
            placed_[c.job] = true;
            start_[c.job] = c.start;
            end_[c.job] = c.start + o.runtimes[c.option];
            width_[c.job] = o.widths[c.option];
            branch(depth + 1, c.start, c.job, placed_area + o.widths[c.option] * o.runtimes[c.option],
                   std::max(makespan, end_[c.job]), remaining_area - o.min_area);
            placed_[c.job] = false;
        }
    }

    std::size_t n_;
    unsigned gpus_;
    std::vector<Options> options_;
    std::vector<double> start_, end_;
    std::vector<unsigned> width_;
    std::vector<bool> placed_;
    double best_makespan_ = std::numeric_limits<double>::infinity();
    std::vector<double> best_start_;
    std::vector<unsigned> best_width_;
    std::uint64_t nodes_ = 0;
};

} // namespace

Schedule exact_schedule(std::span<const Job> jobs, const ClusterSpec &cluster, std::size_t limit, ExactStats *stats) {
    const std::size_t n = jobs.size();
    if (n > limit)
        throw Error(ErrorKind::SearchSpaceTooLarge,
                    std::to_string(n) + " jobs exceed the exact-solver limit of " + std::to_string(limit));
    if (n == 0) return Schedule{cluster.gpu_count, {}, 0.0, "exact"};

    const Schedule incumbent = heuristic_schedule(jobs, cluster);
    std::vector<double> starts(n);
    std::vector<unsigned> widths(n);
    for (const auto &p : incumbent.placements) {
        const auto j = static_cast<std::size_t>(
            std::find_if(jobs.begin(), jobs.end(), [&](const Job &job) { return job.name == p.job; }) - jobs.begin());
        starts[j] = p.start;
        widths[j] = p.width;
    }

    ExactSolver solver(jobs, cluster);
    solver.seed(starts, widths, incumbent.makespan);
    solver.run();
    if (stats) stats->nodes = solver.nodes();
    return materialize(jobs, solver.best_width(), solver.best_start(), cluster.gpu_count, "exact");
}

double savings(const Schedule &naive, const Schedule &best) {
    auto names = [](const Schedule &s) {
        std::vector<std::string> out;
        for (const auto &p : s.placements) out.push_back(p.job);
        std::sort(out.begin(), out.end());
        return out;
    };
    if (names(naive) != names(best)) throw Error(ErrorKind::JobSetMismatch, "schedules cover different jobs");
    return naive.makespan - best.makespan;
}

std::vector<std::string> validate_schedule(const Schedule &schedule, std::span<const Job> jobs,
                                           const ClusterSpec &cluster) {
    std::vector<std::string> problems;
    std::map<std::string, int> count;
    for (const auto &job : jobs) count[job.name] = 0;

    double latest = 0.0;
    for (const auto &p : schedule.placements) {
        latest = std::max(latest, p.end);
        const auto job = std::find_if(jobs.begin(), jobs.end(), [&](const Job &j) { return j.name == p.job; });
        if (job == jobs.end()) {
            problems.push_back("unknown job '" + p.job + "'");
            continue;
        }
        ++count[p.job];
        if (!cluster.allows(p.width) || !job->speedup.contains(p.width)) {
            problems.push_back("'" + p.job + "' placed with unsupported width " + std::to_string(p.width));
            continue;
        }
        const double expected = job->t1_minutes / job->speedup.at(p.width);
        if (std::abs((p.end - p.start) - expected) > 1e-9 * std::max(1.0, expected))
            problems.push_back("'" + p.job + "' duration does not match its runtime");
        if (!(p.end > p.start)) problems.push_back("'" + p.job + "' has non-positive duration");
        if (p.start < 0.0) problems.push_back("'" + p.job + "' starts before 0");
        std::vector<unsigned> ids = p.gpu_ids;
        std::sort(ids.begin(), ids.end());
        if (ids.size() != p.width || std::adjacent_find(ids.begin(), ids.end()) != ids.end())
            problems.push_back("'" + p.job + "' gpu_ids do not match its width");
        for (unsigned g : ids)
            if (g >= cluster.gpu_count) problems.push_back("'" + p.job + "' uses GPU " + std::to_string(g));
    }
    for (const auto &[name, c] : count)
        if (c != 1) problems.push_back("'" + name + "' scheduled " + std::to_string(c) + " times");

    const auto &ps = schedule.placements;
    for (std::size_t a = 0; a < ps.size(); ++a)
        for (std::size_t b = a + 1; b < ps.size(); ++b) {
            if (!(ps[a].start < ps[b].end && ps[b].start < ps[a].end)) continue;
            for (unsigned g : ps[a].gpu_ids)
                if (std::find(ps[b].gpu_ids.begin(), ps[b].gpu_ids.end(), g) != ps[b].gpu_ids.end())
                    problems.push_back("'" + ps[a].job + "' and '" + ps[b].job + "' overlap on GPU " +
                                       std::to_string(g));
        }
    if (schedule.makespan != latest) problems.push_back("makespan is not the latest end time");
    return problems;
}

std::string render_gantt_ascii(const Schedule &schedule, unsigned columns) {
    std::ostringstream out;
    const double span = schedule.makespan > 0.0 ? schedule.makespan : 1.0;
    const std::string symbols = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";
    std::vector<std::string> rows(schedule.gpu_count, std::string(columns, '.'));
    for (std::size_t i = 0; i < schedule.placements.size(); ++i) {
        const auto &p = schedule.placements[i];
        const char mark = symbols[i % symbols.size()];
        auto from = static_cast<unsigned>(std::floor(p.start / span * columns));
        auto to = static_cast<unsigned>(std::ceil(p.end / span * columns));
        to = std::min(std::max(to, from + 1), columns);
        for (unsigned g : p.gpu_ids)
            for (unsigned c = from; c < to && g < rows.size(); ++c) rows[g][c] = mark;
    }
    for (unsigned g = 0; g < schedule.gpu_count; ++g) out << "GPU" << g << (g < 10 ? "  |" : " |") << rows[g] << "|\n";
    for (std::size_t i = 0; i < schedule.placements.size(); ++i) {
        const auto &p = schedule.placements[i];
        char line[256];
        std::snprintf(line, sizeof line, "  %c  %-16s width %u  %10.2f -> %10.2f min\n", symbols[i % symbols.size()],
                      p.job.c_str(), p.width, p.start, p.end);
        out << line;
    }
    return out.str();
}

} // namespace perfcharter
