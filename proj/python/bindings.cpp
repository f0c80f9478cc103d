#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <string>
#include <vector>

#include "skyjoin/bayes.hpp"
#include "skyjoin/config.hpp"
#include "skyjoin/engine.hpp"
#include "skyjoin/errors.hpp"
#include "skyjoin/geometry.hpp"
#include "skyjoin/query.hpp"
#include "skyjoin/synthetic.hpp"

namespace py = pybind11;

namespace {

using namespace skyjoin;

bayes::MatchAccumulator accumulate_detections(const std::vector<double>& ra_deg,
                                              const std::vector<double>& dec_deg,
                                              const std::vector<double>& sigma_arcsec) {
    if (ra_deg.size() != dec_deg.size() || ra_deg.size() != sigma_arcsec.size())
        throw DomainError("ra, dec and sigma lists must have equal length");
    bayes::MatchAccumulator acc;
    for (std::size_t i = 0; i < ra_deg.size(); ++i)
        acc.add(sphere::to_unit_vector({ra_deg[i], dec_deg[i]}),
                bayes::Precision::from_sigma_arcsec(sigma_arcsec[i]));
    return acc;
}

py::dict record_dict(const jobs::JobRecord& r) {
    py::dict d;
    d["id"] = r.id;
    d["queue"] = jobs::queue_kind_name(r.queue);
    d["state"] = jobs::job_state_name(r.state);
    d["query"] = r.query;
    d["error"] = r.error;
    d["output"] = r.output_path;
    d["rows"] = r.rows;
    d["elapsed_sec"] = r.elapsed_sec;
    return d;
}

jobs::QueueKind queue_of(const std::string& name) {
    if (name == "quick") return jobs::QueueKind::Quick;
    if (name == "long") return jobs::QueueKind::Long;
    throw py::value_error("queue must be 'quick' or 'long'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "probabilistic cross-identification across sky catalogs";

    py::register_exception<EngineError>(m, "EngineError");

    m.def("logsinh", &bayes::logsinh, py::arg("w"),
          "log(sinh(w)) for w > 0, stable across the full double range");

    m.def(
        "log_bayes_factor",
        [](const std::vector<double>& ra_deg, const std::vector<double>& dec_deg,
           const std::vector<double>& sigma_arcsec) {
            return bayes::log_bayes_factor(accumulate_detections(ra_deg, dec_deg, sigma_arcsec));
        },
        py::arg("ra_deg"), py::arg("dec_deg"), py::arg("sigma_arcsec"),
        "log evidence that the detections share one true position");

    m.def(
        "best_position",
        [](const std::vector<double>& ra_deg, const std::vector<double>& dec_deg,
           const std::vector<double>& sigma_arcsec) {
            sphere::SkyCoord c = sphere::from_unit_vector(
                bayes::best_position(accumulate_detections(ra_deg, dec_deg, sigma_arcsec)));
            return py::make_tuple(c.ra_deg, c.dec_deg);
        },
        py::arg("ra_deg"), py::arg("dec_deg"), py::arg("sigma_arcsec"),
        "maximum-likelihood common position (ra_deg, dec_deg)");

    m.def(
        "pair_log_bf",
        [](double sigma1_arcsec, double sigma2_arcsec, double psi_arcsec) {
            return bayes::pair_log_bf(bayes::Precision::from_sigma_arcsec(sigma1_arcsec),
                                      bayes::Precision::from_sigma_arcsec(sigma2_arcsec),
                                      psi_arcsec * sphere::kArcsecRad);
        },
        py::arg("sigma1_arcsec"), py::arg("sigma2_arcsec"), py::arg("psi_arcsec"),
        "closed-form two-detection log evidence at separation psi");

    m.def(
        "cutoff_radius_arcsec",
        [](double sigma1_arcsec, double sigma2_arcsec, double limit) {
            return bayes::cutoff_radius(sigma1_arcsec * sphere::kArcsecRad,
                                        sigma2_arcsec * sphere::kArcsecRad, std::log(limit)) /
                   sphere::kArcsecRad;
        },
        py::arg("sigma1_arcsec"), py::arg("sigma2_arcsec"), py::arg("limit"),
        "largest separation (arcsec) at which two detections can reach the evidence limit");

    m.def(
        "angular_distance_deg",
        [](double ra1, double dec1, double ra2, double dec2) {
            return sphere::angular_distance(sphere::to_unit_vector({ra1, dec1}),
                                            sphere::to_unit_vector({ra2, dec2})) *
                   sphere::kDegPerRad;
        },
        py::arg("ra1_deg"), py::arg("dec1_deg"), py::arg("ra2_deg"), py::arg("dec2_deg"),
        "great-circle separation in degrees");

    m.def("zone_of", &sphere::zone_of, py::arg("dec_deg"), py::arg("zone_height_deg"),
          "index of the declination zone containing dec");

    m.def(
        "parse_query",
        [](const std::string& text) { return sql::print(sql::parse(text)); },
        py::arg("text"), "parse a query and return its canonical text");

    m.def(
        "write_demo",
        [](const std::string& dir, std::uint64_t seed, int objects, int sdss_background,
           int galex_background, int twomass_background, double center_ra_deg,
           double center_dec_deg, double field_radius_deg) {
            synth::DemoSpec spec;
            spec.seed = seed;
            spec.objects = objects;
            spec.sdss_background = sdss_background;
            spec.galex_background = galex_background;
            spec.twomass_background = twomass_background;
            spec.center_ra_deg = center_ra_deg;
            spec.center_dec_deg = center_dec_deg;
            spec.field_radius_deg = field_radius_deg;
            return synth::write_demo(dir, spec);
        },
        py::arg("dir"), py::arg("seed") = 42, py::arg("objects") = 400,
        py::arg("sdss_background") = 300, py::arg("galex_background") = 250,
        py::arg("twomass_background") = 200, py::arg("center_ra_deg") = 180.0,
        py::arg("center_dec_deg") = 0.0, py::arg("field_radius_deg") = 2.0,
        "write a reproducible demo field; returns the config path");

    py::class_<engine::Engine>(m, "Engine",
                               "catalogs, planner, executor and job lanes in one place")
        .def(py::init([](const std::string& config_path) {
                 return std::make_unique<engine::Engine>(config::load_file(config_path));
             }),
             py::arg("config_path"))
        .def(
            "explain",
            [](engine::Engine& e, const std::string& text) { return e.explain(text); },
            py::arg("query"), "parse, bind and plan a query without running it")
        .def(
            "run",
            [](engine::Engine& e, const std::string& text, const std::string& queue,
               bool sort_output) {
                jobs::QueueKind kind = queue_of(queue);
                e.sort_output = sort_output;
                jobs::JobRecord rec;
                {
                    py::gil_scoped_release release;
                    rec = e.run_query(text, kind);
                }
                return record_dict(rec);
            },
            py::arg("query"), py::arg("queue") = "quick", py::arg("sort_output") = false,
            "submit a query, wait for it and return its job record")
        .def(
            "submit",
            [](engine::Engine& e, const std::string& text, const std::string& queue) {
                return record_dict(e.submit(text, queue_of(queue)));
            },
            py::arg("query"), py::arg("queue") = "quick")
        .def(
            "wait",
            [](engine::Engine& e, const std::string& id) {
                jobs::JobRecord rec;
                {
                    py::gil_scoped_release release;
                    rec = e.wait(id);
                }
                return record_dict(rec);
            },
            py::arg("id"))
        .def(
            "status",
            [](engine::Engine& e, const std::string& id) { return record_dict(e.status(id)); },
            py::arg("id"))
        .def(
            "cancel",
            [](engine::Engine& e, const std::string& id) { return record_dict(e.cancel(id)); },
            py::arg("id"))
        .def("jobs",
             [](engine::Engine& e) {
                 py::list out;
                 for (const auto& r : e.jobs()) out.append(record_dict(r));
                 return out;
             })
        .def(
            "sample_minis",
            [](engine::Engine& e, double rate, std::uint64_t seed) {
                return e.sample_minis(rate, seed);
            },
            py::arg("rate") = 0.0, py::arg("seed") = 0,
            "sample and persist a mini for every catalog; returns the csv paths")
        .def("catalogs", [](engine::Engine& e) {
            py::list out;
            for (const auto& t : e.catalogs().tables())
                out.append(py::make_tuple(t->schema().qualified_name(), t->row_count()));
            return out;
        });
}
