#include "perfcharter/report.hpp"

#include "support.hpp"

#include <json.hpp>

#include <cmath>

using namespace perfcharter;
using nlohmann::json;

namespace {

MetricMatrix sample() { return parse_profiles(read_data("profiles_1xv100.csv"), Format::Csv).matrix; }

std::size_t count(const std::string &text, const std::string &needle) {
    std::size_t n = 0;
    for (auto at = text.find(needle); at != std::string::npos; at = text.find(needle, at + 1)) ++n;
    return n;
}

} // namespace

TEST_CASE("format_sig") {
    CHECK(format_sig(1300.2031) == "1300.2");
    CHECK(format_sig(0.5) == "0.5");
    CHECK(format_sig(2.0 / 3.0, 3) == "0.667");
}

TEST_CASE("pca.json") {
    const auto model = fit_pca(sample());
    const auto j = json::parse(pca_json(model));
    const std::size_t m = model.components();
    CHECK(j["workloads"].size() == 13);
    CHECK(j["metrics"].size() == m);
    CHECK(j["eigenvalues"].size() == m);
    CHECK(j["eigenvectors"].size() == m);
    CHECK(j["eigenvectors"][0].size() == m);
    CHECK(j["projections"].size() == 13);
    CHECK(j["cumulative_explained"].back().get<double>() == doctest::Approx(1.0));
    CHECK(j["dominant"].size() == m);
    CHECK(j["dominant"][0]["metric"] == dominant_metric(model, 0).metric);
    for (std::size_t i = 0; i < m; ++i) CHECK(j["eigenvalues"][i].get<double>() == model.eigenvalues[i]);
}

TEST_CASE("dendrogram.json and subset_report.json") {
    const auto matrix = sample();
    const auto model = fit_pca(matrix);
    const auto d = pairwise_distances(model.projections);
    const auto tree = agglomerate(d, Linkage::Average, matrix.workloads);
    const auto j = json::parse(dendrogram_json(tree, Linkage::Average));
    CHECK(j["linkage"] == "average");
    CHECK(j["leaves"].size() == 13);
    REQUIRE(j["merges"].size() == 12);
    CHECK(j["merges"][0]["left"] == tree.merges[0].left);
    CHECK(j["merges"][11]["size"] == 13);

    const auto k = cut_k(tree, 4);
    const auto reps = select_representatives(k.clusters, d, matrix.workloads);
    const auto report = coverage(matrix, reps);
    const auto s = json::parse(subset_report_json(report, k.clusters, matrix.workloads, k.threshold));
    CHECK(s["clusters"].size() == 4);
    CHECK(s["selected"].get<std::vector<std::string>>() == reps);
    CHECK(s["coverage"].size() == matrix.cols());
    CHECK(s["coverage"].contains("gpu_util_pct"));
    CHECK(s["clusters"][0][0] == matrix.workloads[k.clusters[0][0]]);

    const auto all = cut_k(tree, 1);
    CHECK(json::parse(subset_report_json(report, all.clusters, matrix.workloads, all.threshold))["threshold"]
              .is_null());
}

TEST_CASE("schedule.json") {
    const auto jobs = parse_jobs(read_data("jobs_scaling.csv"));
    const auto s = naive_schedule(jobs, ClusterSpec::with_default_widths(4));
    const auto j = json::parse(schedule_json(s));
    CHECK(j["gpu_count"] == 4);
    CHECK(j["method"] == s.method);
    CHECK(j["makespan_min"].get<double>() == s.makespan);
    REQUIRE(j["placements"].size() == jobs.size());
    CHECK(j["placements"][0]["gpu_ids"] == json::array({0, 1, 2, 3}));
    CHECK(j["placements"][0]["job"] == "Res50_TF");
}

TEST_CASE("roofline.csv") {
    const auto m = parse_machine(read_data("machine_v100.json"));
    const std::vector<RooflinePoint> pts{{"relu", 1.25, 400.0, Precision::Single},
                                         {"mm", 200.0, 6000.0, Precision::Single},
                                         {"ridge", 17.5, 1.0, Precision::Single}};
    const auto csv = roofline_csv(pts, m);
    CHECK(csv == "name,intensity,throughput,classification\n"
                 "relu,1.25,400,memory_bound\n"
                 "mm,200,6000,compute_bound\n"
                 "ridge,17.5,1,at_ridge\n");
}

TEST_CASE("SVG outputs") {
    const auto m = parse_machine(read_data("machine_v100.json"));
    const std::vector<RooflinePoint> pts{{"a", 1.25, 400.0, Precision::Single},
                                         {"zero", 0.0, 1.0, Precision::Single},
                                         {"inf", std::numeric_limits<double>::infinity(), 1.0, Precision::Single}};
    const auto roof = roofline_svg(pts, m);
    CHECK(roof.starts_with("<svg"));
    CHECK(roof.find(">a<") != std::string::npos);
    CHECK(roof.find(">zero<") == std::string::npos);
    CHECK(roof.find(">inf<") == std::string::npos);

    const auto jobs = parse_jobs(read_data("jobs_scaling.csv"));
    const auto g = gantt_svg(naive_schedule(jobs, ClusterSpec::with_default_widths(4)));
    CHECK(g.starts_with("<svg"));
    for (const auto &j : jobs) CHECK(g.find(j.name) != std::string::npos);

    const auto matrix = sample();
    const auto tree = agglomerate(pairwise_distances(fit_pca(matrix).projections), Linkage::Single, matrix.workloads);
    const auto d = dendrogram_svg(tree, 1.0);
    for (const auto &w : matrix.workloads) CHECK(count(d, ">" + w + "<") == 1);
}

TEST_CASE("write_atomic") {
    const auto dir = std::filesystem::temp_directory_path() / "perfcharter_report_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    const auto path = dir / "out.txt";
    write_atomic(path, "first");
    write_atomic(path, "second");
    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)), {});
    CHECK(text == "second");
    std::size_t files = 0;
    for ([[maybe_unused]] const auto &e : std::filesystem::directory_iterator(dir)) ++files;
    CHECK(files == 1);
    CHECK_ERROR(write_atomic(dir / "missing" / "x.txt", "x"), Io);
    std::filesystem::remove_all(dir);
}
