#include <pybind11/pybind11.h>
#include <pybind11/functional.h>
#include <pybind11/operators.h>
#include <pybind11/stl.h>

#include "mmg/errors.hpp"
#include "mmg/experiments.hpp"
#include "mmg/game.hpp"
#include "mmg/io.hpp"
#include "mmg/metrics.hpp"

namespace py = pybind11;
using namespace mmg;

namespace {

py::dict mean_std_dict(const MeanStd& m) {
    py::dict d;
    d["mean"] = m.mean;
    d["std"] = m.std;
    d["count"] = m.count;
    return d;
}

py::list mean_std_list(const std::vector<MeanStd>& v) {
    py::list out;
    for (const auto& m : v) out.append(mean_std_dict(m));
    return out;
}

py::list market_stats_list(const SeriesStats& s) {
    py::list out;
    for (const auto& m : s.markets) {
        py::dict d;
        d["mean_occupancy"] = m.mean_occupancy;
        d["mean_demand"] = m.mean_demand;
        d["mean_square_demand"] = m.mean_square_demand;
        d["per_capita_variance"] = m.per_capita_variance;
        out.append(d);
    }
    return out;
}

py::dict summary_dict(const RunSummary& s) {
    py::dict d;
    d["seed_index"] = s.seed_index;
    d["seed"] = s.seed;
    d["failed"] = s.failed;
    d["error"] = s.error;
    d["markets"] = market_stats_list(s.stats);
    d["rank"] = s.rank;
    d["big_market"] = s.big_market;
    d["split"] = s.split;
    d["mode"] = std::string(to_string(s.mode));
    d["tau"] = s.relaxation.tau;
    d["tau_censored"] = s.relaxation.censored;
    d["big_fluctuation_frequency"] = s.big_fluctuation_frequency;
    if (s.critical) {
        d["critical_mu"] = s.critical->mu;
        d["critical_first_tick"] = s.critical->first_tick;
    } else {
        d["critical_mu"] = py::none();
        d["critical_first_tick"] = py::none();
    }
    py::list events;
    for (const auto& e : s.events) {
        py::dict ev;
        ev["t"] = e.t;
        ev["occupancy"] = e.occupancy;
        ev["demand"] = e.demand;
        ev["switched_next"] = e.switched_next;
        ev["occupancy_change"] = e.occupancy_change;
        events.append(ev);
    }
    d["events"] = events;
    return d;
}

py::dict point_dict(const SweepPoint& p) {
    py::dict d;
    d["value"] = p.value;
    d["q"] = p.q;
    d["agents"] = p.agents;
    d["occupancy_by_rank"] = mean_std_list(p.occupancy_by_rank);
    d["variance_by_rank"] = mean_std_list(p.variance_by_rank);
    d["occupancy_by_market"] = mean_std_list(p.occupancy_by_market);
    d["variance_by_market"] = mean_std_list(p.variance_by_market);
    d["tau"] = mean_std_dict(p.tau);
    d["big_fluctuation_frequency"] = mean_std_dict(p.big_fluctuation_frequency);
    d["split_fraction"] = p.split_fraction;
    d["big_variance_dominance"] = p.big_variance_dominance;
    d["failed"] = p.failed;
    return d;
}

Window window_or_all(const std::optional<std::pair<std::size_t, std::size_t>>& w, std::size_t n) {
    if (!w) return Window::all(n);
    return {w->first, w->second};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Multi-market minority game simulator";
    m.attr("__version__") = artifact_version;

    auto config_error = py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<SyntaxError>(m, "ConfigSyntaxError", config_error.ptr());

    py::enum_<PayoffKind>(m, "PayoffKind")
        .value("linear", PayoffKind::linear)
        .value("sign", PayoffKind::sign)
        .value("scaled", PayoffKind::scaled);
    py::enum_<TieBreak>(m, "TieBreak").value("random", TieBreak::random).value("lowest_index", TieBreak::lowest_index);
    py::enum_<ZeroDemandRule>(m, "ZeroDemandRule")
        .value("coin", ZeroDemandRule::coin)
        .value("plus_one", ZeroDemandRule::plus_one);
    py::enum_<InitKind>(m, "InitKind").value("zero", InitKind::zero).value("uniform", InitKind::uniform);

    py::class_<GameConfig>(m, "GameConfig")
        .def_static("regular", &GameConfig::regular, py::arg("N"), py::arg("K") = 2, py::arg("s") = 2,
                    py::arg("m") = 5, py::arg("seed") = 0)
        .def_static("irregular", &GameConfig::irregular, py::arg("n1"), py::arg("n2"), py::arg("s") = 2,
                    py::arg("m") = 5, py::arg("seed") = 0)
        .def_readonly("N", &GameConfig::agents)
        .def_readonly("K", &GameConfig::markets)
        .def_readonly("s", &GameConfig::slots)
        .def_readonly("m", &GameConfig::memory)
        .def_readwrite("payoff", &GameConfig::payoff)
        .def_readwrite("seed", &GameConfig::seed)
        .def_readwrite("tie_break", &GameConfig::tie_break)
        .def_readwrite("zero_demand", &GameConfig::zero_demand)
        .def_readwrite("trace_agents", &GameConfig::trace_agents)
        .def("set_uniform_init",
             [](GameConfig& c, double low, double high) { c.init = {InitKind::uniform, low, high}; },
             py::arg("low") = 0.0, py::arg("high") = 1.0)
        .def("set_zero_init", [](GameConfig& c) { c.init = {}; })
        .def_property_readonly("init_kind", [](const GameConfig& c) { return c.init.kind; })
        .def_property_readonly("irregular_sizes",
                               [](const GameConfig& c) -> std::optional<std::pair<int, int>> {
                                   if (c.topology.kind() != MarketTopology::Kind::irregular) return std::nullopt;
                                   return std::make_pair(c.topology.n1(), c.topology.n2());
                               })
        .def_property_readonly("Q", &GameConfig::q)
        .def("validate", &GameConfig::validate)
        .def(py::self == py::self)
        .def("__repr__", [](const GameConfig& c) {
            return "GameConfig(N=" + std::to_string(c.agents) + ", K=" + std::to_string(c.markets) +
                   ", s=" + std::to_string(c.slots) + ", m=" + std::to_string(c.memory) +
                   ", seed=" + std::to_string(c.seed) + ")";
        });

    py::class_<TickRecord>(m, "TickRecord")
        .def_readonly("t", &TickRecord::t)
        .def_readonly("O", &TickRecord::occupancy)
        .def_readonly("A", &TickRecord::demand)
        .def_property_readonly("astar",
                               [](const TickRecord& r) {
                                   std::vector<int> out;
                                   for (Action a : r.minority) out.push_back(to_int(a));
                                   return out;
                               })
        .def_readonly("mu", &TickRecord::mu)
        .def_readonly("C", &TickRecord::switched)
        .def(py::self == py::self);

    m.def(
        "run", [](const GameConfig& cfg, std::int64_t ticks) { return run(cfg, ticks); }, py::arg("config"),
        py::arg("T"), "Runs one game and returns its tick records.");

    m.def("predicted_occupancies", &predicted_occupancies, py::arg("N"), py::arg("K") = 2, py::arg("s") = 2);
    m.def(
        "predicted_irregular",
        [](int n1, int n2, int s) {
            const auto p = predicted_irregular(n1, n2, s);
            return std::make_pair(p.shared_market_asymptote, p.bridge_market_limit);
        },
        py::arg("n1"), py::arg("n2"), py::arg("s") = 2);

    m.def(
        "series_stats",
        [](const std::vector<TickRecord>& records, std::optional<std::pair<std::size_t, std::size_t>> window) {
            return market_stats_list(series_stats(records, window_or_all(window, records.size())));
        },
        py::arg("records"), py::arg("window") = py::none());
    m.def(
        "mu_histogram",
        [](const std::vector<TickRecord>& records, int market, int memory,
           std::optional<std::pair<std::size_t, std::size_t>> window) {
            return mu_histogram(records, market, memory, window_or_all(window, records.size())).p;
        },
        py::arg("records"), py::arg("market"), py::arg("m"), py::arg("window") = py::none());
    m.def(
        "relaxation_time",
        [](const std::vector<TickRecord>& records, int n, int s, double belt) {
            return relaxation_time(records, n, s, belt).tau;
        },
        py::arg("records"), py::arg("N"), py::arg("s") = 2, py::arg("belt") = 0.05);
    m.def(
        "detect_split",
        [](const std::vector<TickRecord>& records, int n) {
            return detect_split(records, Window::last_half(records.size()), n);
        },
        py::arg("records"), py::arg("N"));

    m.def(
        "ensemble_run",
        [](const GameConfig& cfg, std::int64_t ticks, int seeds, unsigned threads) {
            std::vector<RunSummary> runs;
            {
                py::gil_scoped_release release;
                runs = ensemble_run(cfg, ticks, seeds, {}, threads);
            }
            py::list out;
            for (const auto& s : runs) out.append(summary_dict(s));
            return out;
        },
        py::arg("config"), py::arg("T") = 5000, py::arg("seeds") = 10, py::arg("threads") = 0);

    m.def(
        "q_sweep",
        [](const GameConfig& base, const std::vector<int>& values, const std::string& param, int seeds,
           std::int64_t ticks, unsigned threads) {
            SweepSpec spec;
            spec.base = base;
            if (param == "N")
                spec.parameter = SweepParameter::agents;
            else if (param == "n1")
                spec.parameter = SweepParameter::shared_agents;
            else
                throw ConfigError("param", "expected N or n1");
            spec.values = values;
            spec.seeds = seeds;
            spec.ticks = ticks;
            spec.threads = threads;
            std::vector<SweepPoint> points;
            {
                py::gil_scoped_release release;
                points = q_sweep(spec);
            }
            py::list out;
            for (const auto& p : points) out.append(point_dict(p));
            return out;
        },
        py::arg("base"), py::arg("values"), py::arg("param") = "N", py::arg("seeds") = 10, py::arg("T") = 5000,
        py::arg("threads") = 0);
    m.def(
        "estimate_critical_q",
        [](const std::vector<std::pair<double, double>>& q_and_fraction) {
            std::vector<SweepPoint> pts;
            for (const auto& [q, f] : q_and_fraction) {
                SweepPoint p;
                p.q = q;
                p.split_fraction = f;
                pts.push_back(p);
            }
            return estimate_critical_q(pts);
        },
        py::arg("q_and_split_fraction"));

    m.def("figure_names", &figure_names);
    m.def(
        "figure_dataset",
        [](const std::string& name, std::optional<std::uint64_t> seed, std::optional<std::int64_t> ticks,
           std::optional<int> seeds) {
            Dataset d;
            {
                py::gil_scoped_release release;
                d = figure_dataset(name, FigureOverrides{seed, ticks, seeds, 0});
            }
            py::dict out;
            for (const auto& t : d.tables) {
                py::dict table;
                table["columns"] = t.columns;
                table["rows"] = t.rows;
                out[py::str(t.name)] = table;
            }
            return out;
        },
        py::arg("name"), py::arg("seed") = py::none(), py::arg("T") = py::none(), py::arg("seeds") = py::none());

    m.def(
        "parse_config",
        [](const std::string& text) {
            const ParsedConfig c = parse_config(text);
            py::dict d;
            d["game"] = c.game;
            d["seed_given"] = c.seed_given;
            d["T"] = c.ticks;
            d["seeds"] = c.seeds;
            d["threads"] = c.threads;
            if (c.sweep) {
                d["sweep_param"] = c.sweep->parameter == SweepParameter::agents ? "N" : "n1";
                d["sweep_values"] = c.sweep->values;
            }
            d["text"] = serialize_config(c);
            return d;
        },
        py::arg("text"));
    m.def(
        "emit_records",
        [](const std::vector<TickRecord>& records, const std::string& format) {
            return emit_records(records, parse_record_format(format));
        },
        py::arg("records"), py::arg("format") = "csv");
    m.def(
        "parse_records",
        [](const std::string& text, const std::string& format) {
            return parse_records(text, parse_record_format(format));
        },
        py::arg("text"), py::arg("format") = "csv");
    m.def("content_hash", [](const std::string& bytes) { return content_hash(bytes); });
}
