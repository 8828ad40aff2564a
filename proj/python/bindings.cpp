#include "stirlab/acceptance.hpp"
#include "stirlab/contact.hpp"
#include "stirlab/error.hpp"
#include "stirlab/excursions.hpp"
#include "stirlab/geometry.hpp"
#include "stirlab/harmonic.hpp"
#include "stirlab/io.hpp"
#include "stirlab/oracles.hpp"
#include "stirlab/stats.hpp"

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace stirlab;

// Vec <-> any sequence of floats
namespace pybind11::detail
{
    template <>
    struct type_caster<Vec>
    {
        PYBIND11_TYPE_CASTER(Vec, const_name("list[float]"));

        bool load(handle src, bool)
        {
            if (!src || !PySequence_Check(src.ptr()) || PyUnicode_Check(src.ptr()))
                return false;
            auto seq = reinterpret_borrow<sequence>(src);
            if (seq.size() > static_cast<std::size_t>(kMaxDim))
                return false;
            value = Vec(static_cast<int>(seq.size()));
            for (std::size_t i = 0; i < seq.size(); ++i)
                value[static_cast<int>(i)] = seq[i].cast<double>();
            return true;
        }

        static handle cast(const Vec &v, return_value_policy, handle)
        {
            list out(v.dim);
            for (int i = 0; i < v.dim; ++i)
                out[i] = v[i];
            return out.release();
        }
    };
} // namespace pybind11::detail

namespace
{
    py::array_t<double> ledger_array(const LocalTimeLedger &l)
    {
        py::array_t<double> a({static_cast<py::ssize_t>(l.size()), py::ssize_t{2}});
        auto m = a.mutable_unchecked<2>();
        for (std::size_t i = 0; i < l.size(); ++i)
        {
            m(i, 0) = l.entries()[i].t;
            m(i, 1) = l.entries()[i].L;
        }
        return a;
    }

    py::object json_to_py(const nlohmann::json &j)
    {
        return py::module_::import("json").attr("loads")(j.dump());
    }
} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Core simulation, oracle and statistics routines";
    m.attr("__version__") = version_string();

    auto base = py::register_exception<Error>(m, "StirlabError", PyExc_RuntimeError);
    py::register_exception<Underpowered>(m, "Underpowered", base.ptr());

    py::class_<Space>(m, "Space")
        .def_static("euclidean", &Space::euclidean, py::arg("dim"))
        .def_static("torus", &Space::torus, py::arg("dim"), py::arg("edge"))
        .def_readwrite("dim", &Space::dim)
        .def_readwrite("edge", &Space::edge)
        .def("finite", &Space::finite)
        .def("__repr__", [](const Space &s) { return "Space(dim=" + std::to_string(s.dim) + ", edge=" + format_double(s.edge) + ")"; });

    m.def("wrap", &wrap, py::arg("p"), py::arg("space"));
    m.def("displacement", &displacement, py::arg("a"), py::arg("b"), py::arg("space"));
    m.def("distance", &distance, py::arg("a"), py::arg("b"), py::arg("space"));

    py::enum_<Mode>(m, "Mode").value("PUSHING", Mode::Pushing).value("FROZEN", Mode::Frozen);

    py::class_<SimConfig>(m, "SimConfig")
        .def(py::init<>())
        .def_readwrite("space", &SimConfig::space)
        .def_readwrite("dt", &SimConfig::dt)
        .def_readwrite("t_end", &SimConfig::t_end)
        .def_readwrite("seed", &SimConfig::seed)
        .def_readwrite("tol_overlap", &SimConfig::tol_overlap)
        .def_readwrite("max_contact_iters", &SimConfig::max_contact_iters)
        .def_readwrite("mode", &SimConfig::mode)
        .def_readwrite("two_balls", &SimConfig::two_balls)
        .def_readwrite("adaptive", &SimConfig::adaptive)
        .def_readwrite("adaptive_kappa", &SimConfig::adaptive_kappa)
        .def_readwrite("max_step", &SimConfig::max_step)
        .def_readwrite("far_field_radius", &SimConfig::far_field_radius)
        .def_readwrite("far_field_return", &SimConfig::far_field_return)
        .def_readwrite("snapshot_stride", &SimConfig::snapshot_stride)
        .def_readwrite("check_invariants", &SimConfig::check_invariants)
        .def("validate", &SimConfig::validate)
        .def("to_dict", [](const SimConfig &c) { return json_to_py(to_json(c)); });

    py::class_<SystemState>(m, "SystemState")
        .def_static("make", &SystemState::make, py::arg("space"), py::arg("b"), py::arg("x"), py::arg("y"))
        .def_readonly("t", &SystemState::t)
        .def_readonly("B", &SystemState::B)
        .def_readonly("X", &SystemState::X)
        .def_readonly("Y", &SystemState::Y)
        .def_property_readonly("fX", [](const SystemState &s) { return s.fX.coords; })
        .def_property_readonly("fY", [](const SystemState &s) { return s.fY.coords; })
        .def_readonly("LX", &SystemState::LX)
        .def_readonly("LY", &SystemState::LY)
        .def_readonly("vLX", &SystemState::vLX)
        .def_readonly("vLY", &SystemState::vLY);

    py::class_<ContactResult>(m, "ContactResult")
        .def_readonly("X", &ContactResult::X)
        .def_readonly("Y", &ContactResult::Y)
        .def_readonly("dvX", &ContactResult::dvX)
        .def_readonly("dvY", &ContactResult::dvY)
        .def_property_readonly("dLX", [](const ContactResult &r) { return r.report.dLX; })
        .def_property_readonly("dLY", [](const ContactResult &r) { return r.report.dLY; })
        .def_property_readonly("double_contact", [](const ContactResult &r) { return r.report.double_contact; });
    m.def("resolve_contacts", &resolve_contacts, py::arg("B"), py::arg("X"), py::arg("Y"), py::arg("cfg"));

    py::class_<PathResult>(m, "PathResult")
        .def_property_readonly("ledger_x", [](const PathResult &p) { return ledger_array(p.ledger_x); })
        .def_property_readonly("ledger_y", [](const PathResult &p) { return ledger_array(p.ledger_y); })
        .def_property_readonly("ledger", [](const PathResult &p) { return ledger_array(p.ledger); })
        .def_property_readonly("snapshots",
                               [](const PathResult &p)
                               {
                                   py::list out;
                                   for (const auto &s : p.snapshots)
                                       out.append(py::dict(py::arg("t") = s.t, py::arg("LX") = s.LX,
                                                           py::arg("LY") = s.LY, py::arg("B") = s.B,
                                                           py::arg("X") = s.X, py::arg("Y") = s.Y,
                                                           py::arg("fX") = s.fX, py::arg("fY") = s.fY));
                                   return out;
                               })
        .def_readonly("final_state", &PathResult::final_state)
        .def_readonly("steps", &PathResult::steps)
        .def_readonly("double_contact_steps", &PathResult::double_contact_steps)
        .def_readonly("escaped", &PathResult::escaped);
    m.def("run_path", [](const SimConfig &cfg, const SystemState &init) { return run_path(cfg, init); },
          py::arg("cfg"), py::arg("initial"), py::call_guard<py::gil_scoped_release>());

    py::class_<EstimatorResult>(m, "EstimatorResult")
        .def_readonly("value", &EstimatorResult::value)
        .def_readonly("std_error", &EstimatorResult::std_error)
        .def_readonly("n", &EstimatorResult::n)
        .def_readonly("label", &EstimatorResult::label)
        .def("z_score", &EstimatorResult::z_score)
        .def("__repr__", [](const EstimatorResult &e)
             { return "EstimatorResult(" + format_double(e.value) + " +- " + format_double(e.std_error) + ")"; });

    py::class_<TestStatistic>(m, "TestStatistic")
        .def_readonly("statistic", &TestStatistic::statistic)
        .def_readonly("p_value", &TestStatistic::p_value)
        .def_readonly("n", &TestStatistic::n);

    m.def("batch_mean", [](const std::vector<double> &x, std::size_t batches) { return batch_mean(x, batches); },
          py::arg("samples"), py::arg("batches") = 32);
    m.def("ks_exponential", [](const std::vector<double> &x, double rate)
          { return ks_test(x, ReferenceLaw::exponential(rate)); }, py::arg("sample"), py::arg("rate"));
    m.def("ks_normal", [](const std::vector<double> &x, double mean, double var)
          { return ks_test(x, ReferenceLaw::normal(mean, var)); }, py::arg("sample"), py::arg("mean"), py::arg("variance"));
    m.def("ks_two_sample", [](const std::vector<double> &a, const std::vector<double> &b) { return ks_two_sample(a, b); });

    py::call_guard<py::gil_scoped_release> nogil;
    m.def("vector_local_time_2d", &vector_local_time_2d, py::arg("u"), py::arg("n_paths"), py::arg("delta"),
          py::arg("seed"), py::arg("threads") = 1, nogil);
    m.def("kelvin_Linf_sq", &kelvin_Linf_sq, py::arg("d"), py::arg("delta"), py::arg("n_paths"), py::arg("seed"),
          py::arg("threads") = 1, nogil);
    m.def("kelvin_Linf_sq_exact", &kelvin_Linf_sq_exact, py::arg("d"));
    m.def("poisson_kernel_2d", &poisson_kernel_2d, py::arg("theta"), py::arg("t"));
    m.def("coupling_local_times",
          [](int d, std::size_t n, double dt, std::uint64_t seed)
          {
              CouplingOptions opt;
              opt.dim = d;
              opt.dt = dt;
              std::vector<double> out;
              Rng rng(seed);
              for (std::size_t i = 0; i < n; ++i)
                  out.push_back(scaling_coupling_path(opt, rng).local_time_inf);
              return out;
          },
          py::arg("d"), py::arg("n_paths"), py::arg("dt") = 1e-4, py::arg("seed") = 1, nogil);

    m.def("lambda1", &lambda1, py::arg("d"), py::arg("b"));
    m.def("crossing_probability", &crossing_probability, py::arg("d"), py::arg("b"), py::arg("delta"));
    m.def("crossing_rate_estimate",
          [](int d, double b, const std::vector<double> &deltas, std::size_t n, std::uint64_t seed, unsigned threads)
          { return crossing_rate_estimate(d, b, deltas, n, seed, threads).as_result("lambda1"); },
          py::arg("d"), py::arg("b"), py::arg("deltas"), py::arg("n"), py::arg("seed"), py::arg("threads") = 1, nogil);
    m.def("shell_crossing_samples",
          [](int d, double b, std::size_t n, double dt, std::uint64_t seed, unsigned threads)
          {
              SimConfig cfg;
              cfg.dt = dt;
              cfg.adaptive = true;
              cfg.seed = seed;
              return shell_crossing_law(d, b, n, cfg, threads).samples;
          },
          py::arg("d"), py::arg("b"), py::arg("n_cycles"), py::arg("dt") = 1e-3, py::arg("seed") = 1,
          py::arg("threads") = 1, nogil);

    m.def("hitting_ratio",
          [](int d, double b, double edge, std::size_t n, std::uint64_t seed, unsigned threads)
          {
              const auto s = two_ball_setup(d, b, edge);
              return hitting_ratio(s.z, s.obstacles.centers[0], s.obstacles.centers[1], b, s.obstacles.space, n, seed,
                                   threads);
          },
          py::arg("d"), py::arg("b"), py::arg("edge"), py::arg("n"), py::arg("seed") = 1, py::arg("threads") = 1, nogil);
    m.def("sphere_moment_quadrature", &sphere_moment_quadrature, py::arg("d"));

    m.def("run_criterion",
          [](int id, bool quick, unsigned threads, std::uint64_t seed)
          {
              AcceptanceOptions o{quick, threads, seed};
              CriterionResult r;
              {
                  py::gil_scoped_release release;
                  r = run_criterion(id, o);
              }
              return json_to_py(to_json(to_report(r)));
          },
          py::arg("id"), py::arg("quick") = false, py::arg("threads") = 1, py::arg("seed") = 20240917);
}
