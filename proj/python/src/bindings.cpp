#include <fstream>
#include <sstream>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ratefix/anomaly.hpp"
#include "ratefix/cluster.hpp"
#include "ratefix/error.hpp"
#include "ratefix/fixing.hpp"
#include "ratefix/panel.hpp"
#include "ratefix/simulator.hpp"

namespace py = pybind11;
using namespace ratefix;

namespace {

std::vector<double> to_doubles(const std::vector<Decimal>& v) {
    std::vector<double> out;
    out.reserve(v.size());
    for (Decimal d : v) out.push_back(d.to_double());
    return out;
}

Decimal dec(double v) { return Decimal::from_double(v); }

MissingData parse_missing(const std::string& s) {
    if (s == "drop-incomplete") return MissingData::DropIncomplete;
    if (s == "forward-fill") return MissingData::ForwardFill;
    throw Error(Errc::InvalidArgument, "missing policy must be drop-incomplete or forward-fill");
}

DistanceMatrix square_matrix(py::array_t<double, py::array::c_style | py::array::forcecast> values,
                             std::vector<std::string> labels) {
    if (values.ndim() != 2 || values.shape(0) != values.shape(1)) {
        throw Error(Errc::InvalidArgument, "distance matrix must be square");
    }
    const auto n = static_cast<std::size_t>(values.shape(0));
    if (labels.empty()) {
        for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
    }
    auto r = values.unchecked<2>();
    std::vector<std::vector<double>> square(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) square[i][j] = r(static_cast<py::ssize_t>(i), static_cast<py::ssize_t>(j));
    }
    return DistanceMatrix::from_square(std::move(labels), square);
}

}  // namespace

PYBIND11_MODULE(_ratefix, m) {
    m.doc() = "Trimmed-mean fixings, time-series clustering of panel submissions, and dendrogram surveillance.";

    py::register_exception<Error>(m, "RatefixError", PyExc_ValueError);

    // fixing
    py::class_<FixingConfig>(m, "FixingConfig")
        .def(py::init([](double trim_fraction, int publish_precision, std::size_t min_retained) {
                 FixingConfig c{trim_fraction, publish_precision, min_retained};
                 c.validate();
                 return c;
             }),
             py::arg("trim_fraction") = 0.25, py::arg("publish_precision") = 3, py::arg("min_retained") = 1)
        .def_readwrite("trim_fraction", &FixingConfig::trim_fraction)
        .def_readwrite("publish_precision", &FixingConfig::publish_precision)
        .def_readwrite("min_retained", &FixingConfig::min_retained);

    py::class_<FixingResult>(m, "FixingResult")
        .def_property_readonly("raw_mean", [](const FixingResult& r) { return r.raw_mean.to_double(); })
        .def_property_readonly("published", [](const FixingResult& r) { return r.published.to_double(); })
        .def_property_readonly("retained", [](const FixingResult& r) { return to_doubles(r.retained); })
        .def_property_readonly("trimmed_low", [](const FixingResult& r) { return to_doubles(r.trimmed_low); })
        .def_property_readonly("trimmed_high", [](const FixingResult& r) { return to_doubles(r.trimmed_high); })
        .def("__repr__", [](const FixingResult& r) {
            return "FixingResult(raw_mean=" + r.raw_mean.to_string() + ", published=" + r.published.to_string() + ")";
        });

    m.def("compute_fixing",
          [](const std::vector<double>& quotes, const FixingConfig& config) {
              return compute_fixing(quotes_from_doubles(quotes), config);
          },
          py::arg("quotes"), py::arg("config") = FixingConfig{});
    m.def("single_bank_impact",
          [](const std::vector<double>& quotes, std::size_t bank_index, double new_rate, const FixingConfig& config) {
              return single_bank_impact(quotes_from_doubles(quotes), bank_index, dec(new_rate), config).to_double();
          },
          py::arg("quotes"), py::arg("bank_index"), py::arg("new_rate"), py::arg("config") = FixingConfig{});
    m.def("influence_envelope",
          [](const std::vector<double>& quotes, std::size_t bank_index, double lo, double hi, const FixingConfig& config) {
              const auto e = influence_envelope(quotes_from_doubles(quotes), bank_index, config, dec(lo), dec(hi));
              return py::make_tuple(e.min_fixing.to_double(), e.max_fixing.to_double());
          },
          py::arg("quotes"), py::arg("bank_index"), py::arg("lo"), py::arg("hi"), py::arg("config") = FixingConfig{});

    // panel
    py::class_<Submission>(m, "Submission")
        .def(py::init([](const std::string& bank, const std::string& date, const std::string& tenor, double rate) {
                 return Submission{BankId(bank), parse_date(date), parse_tenor(tenor), dec(rate)};
             }),
             py::arg("bank"), py::arg("date"), py::arg("tenor"), py::arg("rate"))
        .def_property_readonly("bank", [](const Submission& s) { return s.bank.str(); })
        .def_property_readonly("date", [](const Submission& s) { return format_date(s.date); })
        .def_property_readonly("tenor", [](const Submission& s) { return std::string(tenor_code(s.tenor)); })
        .def_property_readonly("rate", [](const Submission& s) { return s.rate.to_double(); });

    py::class_<WindowPolicy>(m, "WindowPolicy")
        .def(py::init([](const std::string& missing, int max_gap, double min_coverage) {
                 return WindowPolicy{parse_missing(missing), max_gap, min_coverage};
             }),
             py::arg("missing") = "drop-incomplete", py::arg("max_gap") = 5, py::arg("min_coverage") = 0.9)
        .def_readwrite("max_gap", &WindowPolicy::max_gap)
        .def_readwrite("min_coverage", &WindowPolicy::min_coverage);

    py::class_<PanelWindow>(m, "PanelWindow")
        .def_property_readonly("label", &PanelWindow::label)
        .def_property_readonly("tenor", [](const PanelWindow& w) { return std::string(tenor_code(w.tenor())); })
        .def_property_readonly("banks", [](const PanelWindow& w) {
            std::vector<std::string> out;
            for (const auto& b : w.banks()) out.push_back(b.str());
            return out;
        })
        .def_property_readonly("dates", [](const PanelWindow& w) {
            std::vector<std::string> out;
            for (const auto& d : w.dates()) out.push_back(format_date(d));
            return out;
        })
        .def_property_readonly("rates", [](const PanelWindow& w) {
            py::array_t<double> arr({w.bank_count(), w.date_count()});
            auto r = arr.mutable_unchecked<2>();
            for (std::size_t b = 0; b < w.bank_count(); ++b) {
                for (std::size_t t = 0; t < w.date_count(); ++t) {
                    r(static_cast<py::ssize_t>(b), static_cast<py::ssize_t>(t)) = w.rate(b, t).to_double();
                }
            }
            return arr;
        });

    m.def("read_submissions_csv",
          [](const std::string& path, double rate_floor) {
              std::ifstream f(path);
              if (!f) throw Error(Errc::ParseError, "cannot open " + path);
              return read_submissions_csv(f, CsvOptions{dec(rate_floor)});
          },
          py::arg("path"), py::arg("rate_floor") = 0.0);
    m.def("write_submissions_csv",
          [](const std::vector<Submission>& subs) {
              std::ostringstream out;
              write_submissions_csv(out, subs);
              return out.str();
          },
          py::arg("submissions"));
    m.def("build_window",
          [](const std::vector<Submission>& subs, const std::string& tenor, const std::string& first,
             const std::string& last, const WindowPolicy& policy, const std::string& label) {
              Warnings warnings;
              auto w = build_window(subs, parse_tenor(tenor), DateRange{parse_date(first), parse_date(last)}, policy,
                                    label, &warnings);
              return py::make_tuple(std::move(w), warnings);
          },
          py::arg("submissions"), py::arg("tenor"), py::arg("first"), py::arg("last"),
          py::arg("policy") = WindowPolicy{}, py::arg("label") = "",
          "Returns (window, warnings).");
    m.def("annual_windows",
          [](const std::vector<Submission>& subs, const std::string& tenor, int first_year, int last_year,
             const WindowPolicy& policy, const std::string& dataset) {
              Warnings warnings;
              auto ws = annual_windows(subs, parse_tenor(tenor), first_year, last_year, policy, dataset, &warnings);
              return py::make_tuple(std::move(ws), warnings);
          },
          py::arg("submissions"), py::arg("tenor"), py::arg("first_year"), py::arg("last_year"),
          py::arg("policy") = WindowPolicy{}, py::arg("dataset") = "IBOR");

    // clustering
    py::class_<Dendrogram>(m, "Dendrogram")
        .def_property_readonly("leaves", &Dendrogram::leaves)
        .def_property_readonly("merges", [](const Dendrogram& d) {
            py::list out;
            for (const Merge& mg : d.merges()) out.append(py::make_tuple(mg.left, mg.right, mg.height, mg.size));
            return out;
        })
        .def_property_readonly("root_height", &Dendrogram::root_height)
        .def("to_newick", [](const Dendrogram& d) { return to_newick(d); })
        .def("to_dot", [](const Dendrogram& d) { return to_dot(d); })
        .def("to_json", [](const Dendrogram& d, const std::string& linkage) { return to_json(d, parse_linkage(linkage)); },
             py::arg("linkage") = "ward");

    m.def("euclidean_distance", &euclidean_distance, py::arg("a"), py::arg("b"));
    m.def("distance_matrix",
          [](const PanelWindow& w, bool normalize) {
              const DistanceMatrix d = distance_matrix(w, normalize);
              py::array_t<double> arr({d.size(), d.size()});
              auto r = arr.mutable_unchecked<2>();
              for (std::size_t i = 0; i < d.size(); ++i) {
                  for (std::size_t j = 0; j < d.size(); ++j) r(static_cast<py::ssize_t>(i), static_cast<py::ssize_t>(j)) = d(i, j);
              }
              return arr;
          },
          py::arg("window"), py::arg("normalize") = false);
    m.def("agglomerate",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> dist, const std::string& linkage,
             std::vector<std::string> labels) {
              return agglomerate(square_matrix(dist, std::move(labels)), parse_linkage(linkage));
          },
          py::arg("distances"), py::arg("linkage") = "ward", py::arg("labels") = std::vector<std::string>{});
    m.def("cut", &cut, py::arg("dendrogram"), py::arg("k"));

    // anomaly
    py::class_<IsolationScore>(m, "IsolationScore")
        .def_readonly("bank", &IsolationScore::bank)
        .def_readonly("persistence_height", &IsolationScore::persistence_height)
        .def_readonly("normalized", &IsolationScore::normalized);
    m.def("isolation_scores", &isolation_scores, py::arg("dendrogram"));

    py::class_<AnomalyReport>(m, "AnomalyReport")
        .def_readonly("window_label", &AnomalyReport::window_label)
        .def_property_readonly("linkage", [](const AnomalyReport& r) { return std::string(linkage_name(r.linkage)); })
        .def_readonly("scores", &AnomalyReport::scores)
        .def_readonly("flagged", &AnomalyReport::flagged)
        .def_readonly("threshold_used", &AnomalyReport::threshold_used)
        .def_readonly("median_merge_height", &AnomalyReport::median_merge_height)
        .def_readonly("banks", &AnomalyReport::banks)
        .def_readonly("group_structure", &AnomalyReport::group_structure)
        .def("to_json", [](const AnomalyReport& r) { return to_json(r); });

    m.def("flag_anomalies",
          [](const PanelWindow& w, const std::string& linkage, double threshold_factor, bool normalize) {
              return flag_anomalies(w, DetectOptions{parse_linkage(linkage), threshold_factor, normalize});
          },
          py::arg("window"), py::arg("linkage") = "ward", py::arg("threshold_factor") = 2.0,
          py::arg("normalize") = false);
    m.def("average_daily_rates",
          [](const PanelWindow& w) {
              py::list out;
              for (const auto& row : average_daily_rates(w).rows) {
                  out.append(py::make_tuple(row.label, row.rate.to_double(), row.overall));
              }
              return out;
          },
          py::arg("window"));
    m.def("collusion_caveat",
          [](const AnomalyReport& r, const PanelWindow& w) {
              const CollusionCaveat c = collusion_caveat_report(r, w);
              py::dict d;
              d["group_sizes"] = c.group_sizes;
              d["within_group_mean_distance"] = c.within_group_mean_distance;
              d["largest_group"] = c.largest_group;
              d["largest_group_cohesion"] = c.largest_group_cohesion;
              d["advisory"] = c.advisory;
              return d;
          },
          py::arg("report"), py::arg("window"));

    // simulator
    py::class_<ScenarioConfig>(m, "ScenarioConfig")
        .def(py::init([](std::size_t n_banks, std::size_t n_days, const std::string& base, double noise_sigma,
                         std::uint64_t seed, const std::vector<std::string>& strategies,
                         std::vector<double> bank_bias) {
                 ScenarioConfig c;
                 c.n_banks = n_banks;
                 c.n_days = n_days;
                 c.base = BaseCurve::parse(base);
                 c.noise_sigma = noise_sigma;
                 c.seed = seed;
                 for (const auto& s : strategies) c.strategies.push_back(parse_strategy(s));
                 c.bank_bias = std::move(bank_bias);
                 c.validate();
                 return c;
             }),
             py::arg("n_banks") = 12, py::arg("n_days") = 250, py::arg("base") = "constant:3.0",
             py::arg("noise_sigma") = 0.01, py::arg("seed") = 1, py::arg("strategies") = std::vector<std::string>{},
             py::arg("bank_bias") = std::vector<double>{})
        .def_readonly("n_banks", &ScenarioConfig::n_banks)
        .def_readonly("n_days", &ScenarioConfig::n_days)
        .def_readonly("seed", &ScenarioConfig::seed);

    py::class_<GeneratedPanel>(m, "GeneratedPanel")
        .def_readonly("banks", &GeneratedPanel::banks)
        .def_readonly("submissions", &GeneratedPanel::submissions)
        .def_property_readonly("dates", [](const GeneratedPanel& g) {
            std::vector<std::string> out;
            for (const auto& d : g.dates) out.push_back(format_date(d));
            return out;
        })
        .def_property_readonly("manipulated", [](const GeneratedPanel& g) {
            py::array_t<bool> arr({g.banks.size(), g.dates.size()});
            auto r = arr.mutable_unchecked<2>();
            for (std::size_t b = 0; b < g.banks.size(); ++b) {
                for (std::size_t t = 0; t < g.dates.size(); ++t) {
                    r(static_cast<py::ssize_t>(b), static_cast<py::ssize_t>(t)) = g.is_manipulated(b, t);
                }
            }
            return arr;
        });
    m.def("generate", &generate, py::arg("config"));
    m.def("fixing_series",
          [](const std::vector<Submission>& subs, const std::string& tenor, const FixingConfig& config) {
              const FixingSeries s = fixing_series(subs, parse_tenor(tenor), config);
              py::list fixings;
              for (const auto& f : s.fixings) fixings.append(py::make_tuple(format_date(f.date), f.result));
              py::list failures;
              for (const auto& f : s.failures) failures.append(py::make_tuple(format_date(f.date), f.message));
              return py::make_tuple(fixings, failures);
          },
          py::arg("submissions"), py::arg("tenor") = "1M", py::arg("config") = FixingConfig{});
}
