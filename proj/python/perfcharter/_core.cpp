#include "perfcharter/cluster.hpp"
#include "perfcharter/error.hpp"
#include "perfcharter/report.hpp"
#include "perfcharter/roofline.hpp"
#include "perfcharter/sched.hpp"
#include "perfcharter/stats.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace perfcharter;

// Matrix <-> list of row lists.
namespace pybind11::detail {
template <>
struct type_caster<Matrix> {
    PYBIND11_TYPE_CASTER(Matrix, const_name("list[list[float]]"));

    bool load(handle src, bool convert) {
        if (!isinstance<sequence>(src) || isinstance<str>(src)) return false;
        std::vector<std::vector<double>> rows;
        make_caster<std::vector<std::vector<double>>> inner;
        if (!inner.load(src, convert)) return false;
        rows = cast_op<std::vector<std::vector<double>> &&>(std::move(inner));
        const std::size_t cols = rows.empty() ? 0 : rows.front().size();
        value = Matrix(rows.size(), cols);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != cols) throw value_error("ragged matrix");
            for (std::size_t j = 0; j < cols; ++j) value(i, j) = rows[i][j];
        }
        return true;
    }

    static handle cast(const Matrix &m, return_value_policy, handle) {
        list out;
        for (std::size_t i = 0; i < m.rows(); ++i) {
            list row;
            for (double v : m.row(i)) row.append(v);
            out.append(row);
        }
        return out.release();
    }
};
} // namespace pybind11::detail

namespace {

Format format_of(const std::string &name) {
    if (name == "csv") return Format::Csv;
    if (name == "json") return Format::Json;
    throw Error(ErrorKind::InvalidArgument, "format must be csv or json, got '" + name + "'");
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Workload characterization, roofline analysis and moldable-job scheduling";

    static py::exception<Error> error(m, "PerfCharterError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error &e) {
            const py::object type = error;
            py::object exc = type(e.what());
            exc.attr("kind") = std::string(to_string(e.kind()));
            PyErr_SetObject(error.ptr(), exc.ptr());
        }
    });

    py::enum_<Suite>(m, "Suite")
        .value("MLPerf", Suite::MLPerf)
        .value("DAWNBench", Suite::DAWNBench)
        .value("DeepBench", Suite::DeepBench)
        .value("Other", Suite::Other);
    py::enum_<Linkage>(m, "Linkage")
        .value("Single", Linkage::Single)
        .value("Complete", Linkage::Complete)
        .value("Average", Linkage::Average);
    py::enum_<Precision>(m, "Precision")
        .value("Double", Precision::Double)
        .value("Single", Precision::Single)
        .value("Half", Precision::Half);
    py::enum_<Boundedness>(m, "Boundedness")
        .value("MemoryBound", Boundedness::MemoryBound)
        .value("ComputeBound", Boundedness::ComputeBound)
        .value("AtRidge", Boundedness::AtRidge);

    // model
    py::class_<MetricMatrix>(m, "MetricMatrix")
        .def_readonly("workloads", &MetricMatrix::workloads)
        .def_readonly("suites", &MetricMatrix::suites)
        .def_readonly("metrics", &MetricMatrix::metrics)
        .def_readonly("values", &MetricMatrix::values);
    m.def(
        "parse_profiles",
        [](const std::string &text, const std::string &format) {
            auto r = parse_profiles(text, format_of(format));
            return py::make_tuple(std::move(r.matrix), std::move(r.dropped));
        },
        py::arg("text"), py::arg("format") = "csv", "Returns (matrix, dropped columns).");

    py::class_<KernelRecord>(m, "KernelRecord")
        .def_readonly("workload", &KernelRecord::workload)
        .def_readonly("class_name", &KernelRecord::class_name)
        .def_readonly("time_ms", &KernelRecord::time_ms)
        .def_readonly("calls", &KernelRecord::calls)
        .def_readonly("unique_kernels", &KernelRecord::unique_kernels)
        .def_readonly("flops", &KernelRecord::flops)
        .def_readonly("transactions", &KernelRecord::transactions);
    m.def(
        "parse_kernels", [](const std::string &text, const std::string &format) { return parse_kernels(text, format_of(format)); },
        py::arg("text"), py::arg("format") = "csv");

    py::class_<Job>(m, "Job")
        .def(py::init(&make_job), py::arg("name"), py::arg("t1_minutes"), py::arg("speedup") = std::map<unsigned, double>{})
        .def_readonly("name", &Job::name)
        .def_readonly("t1_minutes", &Job::t1_minutes)
        .def_readonly("speedup", &Job::speedup)
        .def("__repr__", [](const Job &j) { return "Job('" + j.name + "', " + format_double(j.t1_minutes) + ")"; });
    m.def(
        "parse_jobs", [](const std::string &text, const std::string &format) { return parse_jobs(text, format_of(format)); },
        py::arg("text"), py::arg("format") = "csv");

    // stats
    py::class_<PcaModel>(m, "PcaModel")
        .def_readonly("workloads", &PcaModel::workloads)
        .def_property_readonly("metrics", &PcaModel::metrics)
        .def_property_readonly("means", [](const PcaModel &p) { return p.standardization.means; })
        .def_property_readonly("stds", [](const PcaModel &p) { return p.standardization.stds; })
        .def_readonly("dropped", &PcaModel::dropped)
        .def_readonly("eigenvalues", &PcaModel::eigenvalues)
        .def_readonly("eigenvectors", &PcaModel::eigenvectors)
        .def_readonly("projections", &PcaModel::projections)
        .def_readonly("explained", &PcaModel::explained)
        .def("cumulative_explained", &cumulative_explained)
        .def(
            "dominant_metric",
            [](const PcaModel &p, std::size_t pc) {
                const auto d = dominant_metric(p, pc);
                return py::make_tuple(d.metric, d.loading);
            },
            py::arg("pc"));
    m.def("fit_pca", &fit_pca, py::arg("matrix"));
    m.def(
        "jacobi_eigen",
        [](const Matrix &a) {
            auto e = jacobi_eigen(a);
            return py::make_tuple(std::move(e.values), std::move(e.vectors));
        },
        py::arg("matrix"), "Returns (descending eigenvalues, eigenvectors as columns).");

    // cluster
    py::class_<Merge>(m, "Merge")
        .def_readonly("left", &Merge::left)
        .def_readonly("right", &Merge::right)
        .def_readonly("height", &Merge::height)
        .def_readonly("size", &Merge::size);
    py::class_<Dendrogram>(m, "Dendrogram")
        .def_readonly("leaves", &Dendrogram::leaves)
        .def_readonly("merges", &Dendrogram::merges);
    m.def("pairwise_distances", &pairwise_distances, py::arg("points"), py::arg("threads") = 1);
    m.def("agglomerate", &agglomerate, py::arg("distances"), py::arg("linkage") = Linkage::Average,
          py::arg("names") = std::vector<std::string>{});
    m.def("cut", &cut, py::arg("dendrogram"), py::arg("height"));
    m.def(
        "cut_k",
        [](const Dendrogram &d, std::size_t k) {
            auto c = cut_k(d, k);
            return py::make_tuple(std::move(c.clusters), c.threshold);
        },
        py::arg("dendrogram"), py::arg("k"), "Returns (clusters, threshold).");
    m.def("select_representatives", &select_representatives, py::arg("clusters"), py::arg("distances"),
          py::arg("names"));
    m.def(
        "coverage",
        [](const MetricMatrix &full, const std::vector<std::string> &subset) {
            py::dict out;
            for (const auto &c : coverage(full, subset).coverage)
                out[py::str(c.metric)] = py::make_tuple(c.low_pct, c.high_pct, c.degenerate);
            return out;
        },
        py::arg("full"), py::arg("subset"), "metric -> (low_pct, high_pct, degenerate)");

    // roofline
    py::class_<MachineModel>(m, "MachineModel")
        .def_readonly("name", &MachineModel::name)
        .def_readonly("peaks", &MachineModel::peaks)
        .def_readonly("mem_bandwidth_gbps", &MachineModel::mem_bandwidth_gbps)
        .def("peak", &MachineModel::peak)
        .def("ridge", &MachineModel::ridge)
        .def("warnings", &MachineModel::warnings);
    m.def("parse_machine", &parse_machine, py::arg("json_text"));
    py::class_<RooflinePoint>(m, "RooflinePoint")
        .def_readonly("name", &RooflinePoint::name)
        .def_readonly("intensity", &RooflinePoint::intensity)
        .def_readonly("throughput", &RooflinePoint::throughput)
        .def_readonly("precision", &RooflinePoint::precision);
    m.def("intensity", &intensity, py::arg("flops"), py::arg("transactions"),
          py::arg("transaction_bytes") = kDefaultTransactionBytes);
    m.def("throughput", &throughput, py::arg("flops"), py::arg("time_s"));
    m.def("attainable", &attainable, py::arg("machine"), py::arg("precision"), py::arg("intensity"));
    m.def(
        "classify",
        [](const MachineModel &machine, Precision precision, const RooflinePoint &p) {
            return std::string(to_string(classify(machine, precision, p)));
        },
        py::arg("machine"), py::arg("precision"), py::arg("point"));
    m.def("kernel_point", &kernel_point, py::arg("record"), py::arg("transaction_bytes") = kDefaultTransactionBytes,
          py::arg("precision") = Precision::Single);
    m.def(
        "workload_point",
        [](const std::vector<KernelRecord> &records, std::uint64_t bytes, std::string name) {
            return workload_point(records, bytes, std::move(name));
        },
        py::arg("records"), py::arg("transaction_bytes") = kDefaultTransactionBytes, py::arg("name") = "");
    m.def(
        "group_by_workload", [](const std::vector<KernelRecord> &records) { return group_by_workload(records); },
        py::arg("records"));

    // sched
    py::class_<ClusterSpec>(m, "ClusterSpec")
        .def(py::init([](unsigned gpus, std::vector<unsigned> widths) {
                 return widths.empty() ? ClusterSpec::with_default_widths(gpus) : ClusterSpec::make(gpus, std::move(widths));
             }),
             py::arg("gpu_count"), py::arg("widths") = std::vector<unsigned>{})
        .def_readonly("gpu_count", &ClusterSpec::gpu_count)
        .def_readonly("widths", &ClusterSpec::widths);
    py::class_<Placement>(m, "Placement")
        .def_readonly("job", &Placement::job)
        .def_readonly("width", &Placement::width)
        .def_readonly("gpu_ids", &Placement::gpu_ids)
        .def_readonly("start", &Placement::start)
        .def_readonly("end", &Placement::end);
    py::class_<Schedule>(m, "Schedule")
        .def_readonly("gpu_count", &Schedule::gpu_count)
        .def_readonly("placements", &Schedule::placements)
        .def_readonly("makespan", &Schedule::makespan)
        .def_readonly("method", &Schedule::method)
        .def("to_json", &schedule_json)
        .def("gantt", &render_gantt_ascii, py::arg("columns") = 64);

    using Jobs = const std::vector<Job> &;
    m.def("runtime", &runtime, py::arg("job"), py::arg("width"));
    m.def("scaling_efficiency", &scaling_efficiency, py::arg("job"), py::arg("width"));
    m.def("naive_schedule", [](Jobs jobs, const ClusterSpec &c) { return naive_schedule(jobs, c); }, py::arg("jobs"),
          py::arg("cluster"));
    m.def(
        "permutation_search",
        [](Jobs jobs, const ClusterSpec &c, std::size_t limit, unsigned threads) {
            py::gil_scoped_release release;
            return permutation_search(jobs, c, limit, threads).schedule;
        },
        py::arg("jobs"), py::arg("cluster"), py::arg("limit") = kPermutationLimit, py::arg("threads") = 1);
    m.def("heuristic_schedule", [](Jobs jobs, const ClusterSpec &c) { return heuristic_schedule(jobs, c); },
          py::arg("jobs"), py::arg("cluster"));
    m.def(
        "exact_schedule",
        [](Jobs jobs, const ClusterSpec &c, std::size_t limit) {
            py::gil_scoped_release release;
            return exact_schedule(jobs, c, limit);
        },
        py::arg("jobs"), py::arg("cluster"), py::arg("limit") = kExactLimit);
    m.def("savings", &savings, py::arg("naive"), py::arg("best"));
    m.def("validate_schedule", [](const Schedule &s, Jobs jobs, const ClusterSpec &c) {
        return validate_schedule(s, jobs, c);
    }, py::arg("schedule"), py::arg("jobs"), py::arg("cluster"));
}
