#include "perfcharter/roofline.hpp"

#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace perfcharter;

namespace {

MachineModel v100() { return parse_machine(read_data("machine_v100.json")); }

const KernelRecord kRelu{"", "relu", 18482.42, 62426, 22, 8063786730942ULL, 198032803079ULL};
const KernelRecord kMM4x1{"", "MM_4x1", 91.71, 0, 0, 592209510400ULL, 88557000ULL};

} // namespace

TEST_CASE("intensity") {
    CHECK(intensity(kRelu.flops, kRelu.transactions) == doctest::Approx(1.27).epsilon(0.01 / 1.27));
    CHECK(std::abs(intensity(kMM4x1.flops, kMM4x1.transactions, 32) - 208.98) <= 0.05);
    CHECK(intensity(0, 12345) == 0.0);
    CHECK(std::isinf(intensity(10, 0)));
    CHECK(intensity(0, 0) == 0.0);
    CHECK_ERROR(intensity(1, 1, 0), InvalidArgument);
}

TEST_CASE("throughput") {
    CHECK(std::abs(throughput(kRelu.flops, 18.48242) - 436.29) <= 0.5);
    CHECK(throughput(0, 3.0) == 0.0);
    CHECK(std::abs(throughput(kMM4x1.flops, 0.09171) - 6457.5) <= 1.0);
    CHECK_ERROR(throughput(1, 0.0), NonPositiveTime);
    CHECK_ERROR(throughput(1, -1.0), NonPositiveTime);
}

TEST_CASE("machine config") {
    const auto m = v100();
    CHECK(m.peak(Precision::Single) == 14000.0);
    CHECK(m.ridge(Precision::Single) == 17.5);
    CHECK(m.warnings().empty());
    CHECK(parse_machine(serialize_machine(m)).peaks == m.peaks);

    const auto odd = parse_machine(R"({"peaks":{"single":100,"half":50},"mem_bandwidth_gbps":10})");
    CHECK(odd.warnings().size() == 1);
    CHECK_ERROR(odd.peak(Precision::Double), UnknownPrecision);
    CHECK_ERROR(parse_machine(R"({"peaks":{"quad":1},"mem_bandwidth_gbps":10})"), UnknownPrecision);
    CHECK_ERROR(parse_machine(R"({"peaks":{"single":-1},"mem_bandwidth_gbps":10})"), InvalidArgument);
    CHECK_ERROR(parse_machine(R"({"peaks":{"single":1},"mem_bandwidth_gbps":0})"), InvalidArgument);
    CHECK_ERROR(parse_machine("{"), MalformedRow);
}

TEST_CASE("attainable") {
    const auto m = v100();
    CHECK(attainable(m, Precision::Single, 0.0) == 0.0);
    CHECK(attainable(m, Precision::Single, 17.5) == 14000.0);
    CHECK(attainable(m, Precision::Single, 1e6) == 14000.0);
    CHECK(attainable(m, Precision::Single, 1.27) == doctest::Approx(800.0 * 1.27));
    CHECK(attainable(m, Precision::Single, std::numeric_limits<double>::infinity()) == 14000.0);
    CHECK_ERROR(attainable(parse_machine(R"({"peaks":{"single":1},"mem_bandwidth_gbps":1})"), Precision::Half, 1.0),
                UnknownPrecision);

    double last = 0.0;
    for (double i = 1e-3; i < 1e4; i *= 1.1) {
        const double a = attainable(m, Precision::Single, i);
        CHECK(a >= last);
        CHECK(a <= 14000.0);
        if (i >= m.ridge(Precision::Single)) CHECK(a == 14000.0);
        last = a;
    }
}

TEST_CASE("classify") {
    const auto m = v100();
    CHECK(classify(m, Precision::Single, {"a", 1.27, 0, Precision::Single}) == Boundedness::MemoryBound);
    CHECK(classify(m, Precision::Single, {"b", 14000.0 / 800.0, 0, Precision::Single}) == Boundedness::AtRidge);
    CHECK(classify(m, Precision::Single, {"c", 208.98, 0, Precision::Single}) == Boundedness::ComputeBound);
    CHECK(classify(m, Precision::Single, {"d", std::numeric_limits<double>::infinity(), 0, Precision::Single}) ==
          Boundedness::ComputeBound);
}

TEST_CASE("workload_point") {
    const auto single = workload_point(std::vector{kRelu});
    const auto k = kernel_point(kRelu);
    CHECK(single.intensity == k.intensity);
    CHECK(single.throughput == k.throughput);

    KernelRecord f{"", "f", 10, 1, 1, 1000, 50}, zero{"", "z", 10, 1, 1, 0, 50};
    CHECK(workload_point(std::vector{f, zero}).intensity == doctest::Approx(intensity(1000, 50) / 2.0));
    CHECK_ERROR(workload_point(std::vector<KernelRecord>{}), EmptyInput);
    KernelRecord idle{"", "i", 0, 1, 1, 10, 1};
    CHECK_ERROR(workload_point(std::vector{idle}), ZeroTotalTime);
}

TEST_CASE("appendix kernels reproduce the printed columns") {
    const auto records = parse_kernels(read_data("appendix_kernels.csv"), Format::Csv);
    auto find = [&](const std::string &name) {
        return *std::ranges::find_if(records, [&](const KernelRecord &r) { return r.class_name == name; });
    };
    const auto relu = kernel_point(find("relu"));
    CHECK(std::abs(relu.intensity - 1.27) <= 0.01);
    CHECK(std::abs(relu.throughput - 436.29) <= 0.5);
    CHECK(std::abs(kernel_point(find("MM_4x1")).intensity - 208.98) <= 0.05);
}

TEST_CASE("doubling the transaction size halves every intensity") {
    const auto records = parse_kernels(read_data("appendix_kernels.csv"), Format::Csv);
    for (const auto &r : records) {
        const double a = intensity(r.flops, r.transactions, 32), b = intensity(r.flops, r.transactions, 64);
        if (std::isinf(a)) {
            CHECK(std::isinf(b));
        } else {
            CHECK(b == a / 2.0);
        }
    }
}

TEST_CASE("seven aggregate workload points") {
    const auto m = v100();
    const auto records = parse_kernels(read_data("appendix_kernels_by_benchmark.csv"), Format::Csv);
    const auto groups = group_by_workload(records);
    CHECK(groups.size() == 7);
    for (const auto &[name, group] : groups) {
        const auto p = workload_point(group, kDefaultTransactionBytes, name);
        CHECK(p.name == name);
        const auto c = classify(m, Precision::Single, p);
        MESSAGE(name << ": intensity " << p.intensity << ", " << to_string(c));
        if (p.throughput > attainable(m, Precision::Single, p.intensity)) MESSAGE(name << " lies above the roof");
    }
}
