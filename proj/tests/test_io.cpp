#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mmg/cli.hpp"
#include "mmg/errors.hpp"
#include "mmg/io.hpp"

using namespace mmg;
namespace fs = std::filesystem;

namespace {

int cli(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
    args.insert(args.begin(), "mmg");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int rc = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
    if (out_text) *out_text = out.str();
    if (err_text) *err_text = err.str();
    return rc;
}

fs::path scratch_dir(const std::string& name) {
    auto p = fs::temp_directory_path() / ("mmg_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

TickRecord two_market_tick() {
    TickRecord r;
    r.t = 0;
    r.occupancy = {3, 2};
    r.demand = {1, -2};
    r.minority = {Action::minus, Action::plus};
    r.mu = {5, 17};
    r.switched = 0;
    return r;
}

}  // namespace

TEST_CASE("minimal config fills documented defaults") {
    auto c = parse_config("N=11 K=2 s=2 m=5 payoff=linear topology=regular seed=1 T=5000");
    CHECK(c.game.agents == 11);
    CHECK(c.game.markets == 2);
    CHECK(c.game.slots == 2);
    CHECK(c.game.memory == 5);
    CHECK(c.game.payoff == PayoffKind::linear);
    CHECK(c.game.topology == MarketTopology::regular(11, 2));
    CHECK(c.game.seed == 1);
    CHECK(c.seed_given);
    CHECK(c.ticks == 5000);
    CHECK(c.game.init.kind == InitKind::zero);
    CHECK(c.game.tie_break == TieBreak::random);
    CHECK(c.game.zero_demand == ZeroDemandRule::coin);
    CHECK(c.analysis == AnalysisOptions{});
    CHECK(c.seeds == 10);
    CHECK_FALSE(c.sweep);
}

TEST_CASE("domain errors name the field") {
    try {
        parse_config("N=11 s=0");
        FAIL("expected an error");
    } catch (const ConfigError& e) {
        CHECK(e.field() == "s");
    }
    CHECK_THROWS_AS(parse_config("N=11 m=25"), ConfigError);
    CHECK_THROWS_AS(parse_config("K=2"), ConfigError);
    CHECK_THROWS_AS(parse_config("N=11 payoff=quadratic"), ConfigError);
    CHECK_THROWS_AS(parse_config("topology=irregular n1=10"), ConfigError);
    CHECK_THROWS_AS(parse_config("topology=irregular n1=10 n2=5 N=16"), ConfigError);
    CHECK_THROWS_AS(parse_config("topology=irregular n1=10 n2=5 K=3"), ConfigError);
    CHECK_THROWS_AS(parse_config("N=10 n1=3"), ConfigError);
    CHECK_THROWS_AS(parse_config("N=ten"), ConfigError);
}

TEST_CASE("irregular topology from n1 and n2") {
    auto c = parse_config("topology=irregular n1=1146 n2=301");
    CHECK(c.game.agents == 1447);
    CHECK(c.game.markets == 2);
    CHECK(c.game.topology.kind() == MarketTopology::Kind::irregular);
    CHECK(c.game.topology.n1() == 1146);
    CHECK(c.game.topology.n2() == 301);
}

TEST_CASE("syntax errors carry line and column") {
    try {
        parse_config("N=11\nK=2 bogus=3\n");
        FAIL("expected an error");
    } catch (const SyntaxError& e) {
        CHECK(e.line() == 2);
        CHECK(e.column() == 5);
    }
    try {
        parse_config("N=11\n\n  [game\n");
        FAIL("expected an error");
    } catch (const SyntaxError& e) {
        CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(parse_config("N=11 K"), SyntaxError);
    CHECK_THROWS_AS(parse_config("N="), SyntaxError);
    CHECK_THROWS_AS(parse_config("[nope]\nN=1"), SyntaxError);
}

TEST_CASE("sections, comments and later entries winning") {
    auto c = parse_config(R"(# comment
N = 64   K=2  # trailing
N=128
[analysis]
theta=0.8 window=last:4000
[ensemble]
seeds=4 threads=2
[sweep]
param=N values=64, 128,256
)");
    CHECK(c.game.agents == 128);
    CHECK(c.analysis.theta == 0.8);
    CHECK(c.analysis.window == WindowPolicy::last_count);
    CHECK(c.analysis.window_count == 4000);
    CHECK(c.seeds == 4);
    CHECK(c.threads == 2);
    REQUIRE(c.sweep);
    CHECK(c.sweep->values == std::vector<int>{64, 128, 256});

    auto swept = parse_config("[sweep]\nvalues=11,64");
    CHECK(swept.game.agents == 11);
}

TEST_CASE("serialize then parse is a fixed point") {
    RngStream rng(321);
    for (int trial = 0; trial < 200; ++trial) {
        ParsedConfig c;
        GameConfig& g = c.game;
        if (rng.coin()) {
            g = GameConfig::regular(1 + static_cast<int>(rng.below(5000)), 1 + static_cast<int>(rng.below(5)),
                                    1 + static_cast<int>(rng.below(4)), 1 + static_cast<int>(rng.below(24)),
                                    rng.next_u64());
        } else {
            g = GameConfig::irregular(static_cast<int>(rng.below(3000)), 1 + static_cast<int>(rng.below(400)),
                                      1 + static_cast<int>(rng.below(4)), 1 + static_cast<int>(rng.below(10)),
                                      rng.next_u64());
        }
        g.payoff = static_cast<PayoffKind>(rng.below(3));
        g.tie_break = rng.coin() ? TieBreak::random : TieBreak::lowest_index;
        g.zero_demand = rng.coin() ? ZeroDemandRule::coin : ZeroDemandRule::plus_one;
        if (rng.coin()) g.init = {InitKind::uniform, -rng.uniform01(), rng.uniform01() * 3.7};
        g.trace_agents = rng.coin();
        c.seed_given = true;
        c.ticks = 1 + static_cast<std::int64_t>(rng.below(100000));
        c.seeds = 1 + static_cast<int>(rng.below(300));
        c.threads = static_cast<unsigned>(rng.below(8));
        c.analysis.theta = 0.5 + rng.uniform01() * 0.5;
        c.analysis.belt = 0.01 + rng.uniform01() * 0.2;
        c.analysis.window = static_cast<WindowPolicy>(rng.below(3));
        if (c.analysis.window == WindowPolicy::last_count) c.analysis.window_count = 1 + rng.below(5000);
        if (rng.coin()) c.sweep = SweepDirectives{SweepParameter::agents, {11, 64, 1447}};

        const auto text = serialize_config(c);
        const auto back = parse_config(text);
        REQUIRE(back == c);
        REQUIRE(serialize_config(back) == text);
    }
}

TEST_CASE("manifest round trip over random configs") {
    RngStream rng(654);
    for (int trial = 0; trial < 200; ++trial) {
        RunManifest m;
        m.config = GameConfig::regular(1 + static_cast<int>(rng.below(4000)), 1 + static_cast<int>(rng.below(4)),
                                       1 + static_cast<int>(rng.below(4)), 1 + static_cast<int>(rng.below(24)),
                                       rng.next_u64());
        if (rng.coin()) m.config = GameConfig::irregular(static_cast<int>(rng.below(900)), 7, 2, 5, rng.next_u64());
        m.config.payoff = static_cast<PayoffKind>(rng.below(3));
        m.config.init = {rng.coin() ? InitKind::uniform : InitKind::zero, rng.uniform01(), 1.0 + rng.uniform01()};
        m.config.tie_break = rng.coin() ? TieBreak::random : TieBreak::lowest_index;
        m.ticks = 1 + static_cast<std::int64_t>(rng.below(10000));
        m.format = rng.coin() ? "csv" : "jsonl";
        m.content_hash = content_hash(std::to_string(rng.next_u64()));
        const auto text = serialize_manifest(m);
        REQUIRE(parse_manifest(text) == m);
        REQUIRE(serialize_manifest(parse_manifest(text)) == text);
    }
}

TEST_CASE("csv records") {
    std::vector<TickRecord> one{two_market_tick()};
    CHECK(emit_records(one, RecordFormat::csv) == "t,k,O,A,astar,mu,C\n0,0,3,1,-1,5,0\n0,1,2,-2,1,17,0\n");
    CHECK(emit_records({}, RecordFormat::csv) == "t,k,O,A,astar,mu,C\n");
}

TEST_CASE("record emit and parse are byte stable") {
    auto cfg = GameConfig::regular(40, 3, 2, 4, 9);
    auto recs = run(cfg, 120);
    for (auto fmt : {RecordFormat::csv, RecordFormat::jsonl}) {
        const auto a = emit_records(recs, fmt);
        const auto parsed = parse_records(a, fmt);
        CHECK(parsed == recs);
        CHECK(emit_records(parsed, fmt) == a);
        CHECK(emit_records(run(cfg, 120), fmt) == a);
        CHECK(content_hash(a) == content_hash(emit_records(parsed, fmt)));
    }
    auto traced = cfg;
    traced.trace_agents = true;
    auto with_agents = run(traced, 20);
    const auto j = emit_records(with_agents, RecordFormat::jsonl);
    CHECK(parse_records(j, RecordFormat::jsonl) == with_agents);
}

TEST_CASE("jsonl has per-market arrays") {
    std::vector<TickRecord> one{two_market_tick()};
    CHECK(emit_records(one, RecordFormat::jsonl) == "{\"t\":0,\"O\":[3,2],\"A\":[1,-2],\"astar\":[-1,1],\"mu\":[5,17],\"C\":0}\n");
    CHECK_THROWS(parse_record_format("xml"));
}

TEST_CASE("real formatting and hashing") {
    CHECK(format_real(1200.0) == "1200");
    CHECK(format_real(562.6875) == "562.6875");
    CHECK(format_real(0.1) == "0.10000000000000001");
    CHECK(std::stod(format_real(1.0 / 3.0)) == 1.0 / 3.0);
    // FNV-1a 64 test vectors
    CHECK(content_hash("") == "fnv1a64:cbf29ce484222325");
    CHECK(content_hash("a") == "fnv1a64:af63dc4c8601ec8c");
}

TEST_CASE("cli exit codes") {
    std::string out, err;
    CHECK(cli({"predict", "--N", "1600", "--K", "2", "--s", "2"}, &out) == exit_ok);
    CHECK(out == "1200\n400\n");
    CHECK(cli({"predict", "--n1", "1000", "--n2", "301"}, &out) == exit_ok);
    CHECK(out == "1225.75\n75.25\n");

    const auto dir = scratch_dir("noseed");
    CHECK(cli({"run", "--N", "11", "--out", dir.string()}, &out, &err) == exit_config);
    CHECK_FALSE(err.empty());
    CHECK(cli({"run", "--N", "11", "--s", "0", "--seed", "1"}, &out, &err) == exit_config);
    CHECK(cli({"nonsense"}, &out, &err) == exit_usage);
    CHECK(cli({"run", "--no-such-flag"}, &out, &err) == exit_usage);
    CHECK(cli({"run", "--config", "/nonexistent/file.cfg", "--seed", "1"}, &out, &err) == exit_config);
    CHECK(cli({"figure", "fig99", "--out", dir.string()}, &out, &err) != exit_ok);
    CHECK(cli({"--help"}, &out, &err) == exit_ok);
}

TEST_CASE("cli run writes records and a matching manifest") {
    const auto dir = scratch_dir("run");
    CHECK(cli({"run", "--N", "51", "--seed", "3", "--T", "200", "--out", dir.string()}) == exit_ok);
    const auto csv = slurp(dir / "records.csv");
    const auto manifest = parse_manifest(slurp(dir / "manifest.json"));
    CHECK(manifest.content_hash == content_hash(csv));
    CHECK(manifest.ticks == 200);
    CHECK(manifest.config.agents == 51);
    CHECK(parse_records(csv, RecordFormat::csv) == run(manifest.config, 200));

    std::string first, second;
    CHECK(cli({"run", "--N", "51", "--seed", "3", "--T", "200", "--stdout"}, &first) == exit_ok);
    CHECK(cli({"run", "--N", "51", "--seed", "3", "--T", "200", "--stdout"}, &second) == exit_ok);
    CHECK(first == csv);
    CHECK(first == second);
}

TEST_CASE("cli config file with flag overrides") {
    const auto dir = scratch_dir("cfg");
    {
        std::ofstream f(dir / "game.cfg");
        f << "N=31 K=2 m=3 seed=5 T=100\n";
    }
    CHECK(cli({"run", "--config", (dir / "game.cfg").string(), "--N", "41", "--out", dir.string()}) == exit_ok);
    CHECK(parse_manifest(slurp(dir / "manifest.json")).config.agents == 41);
}

TEST_CASE("cli figure and ensemble outputs") {
    const auto dir = scratch_dir("fig");
    CHECK(cli({"figure", "fig6_0", "--T", "300", "--out", dir.string()}) == exit_ok);
    int files = 0;
    for (const auto& e : fs::directory_iterator(dir)) files += e.path().filename().string().starts_with("fig6_0_");
    CHECK(files == 4);

    CHECK(cli({"ensemble", "--N", "64", "--seed", "2", "--T", "200", "--seeds", "3", "--out", dir.string()}) ==
          exit_ok);
    const auto text = slurp(dir / "ensemble.csv");
    CHECK(std::count(text.begin(), text.end(), '\n') == 4);

    setenv("MMG_OUT_DIR", dir.string().c_str(), 1);
    fs::remove(dir / "ensemble.csv");
    CHECK(cli({"ensemble", "--N", "64", "--seed", "2", "--T", "200", "--seeds", "2"}) == exit_ok);
    CHECK(fs::exists(dir / "ensemble.csv"));
    unsetenv("MMG_OUT_DIR");
}

TEST_CASE("cli sweep") {
    const auto dir = scratch_dir("sweep");
    std::string err;
    CHECK(cli({"sweep", "--values", "32,64", "--seed", "1", "--T", "200", "--seeds", "2", "--out", dir.string()},
              nullptr, &err) == exit_ok);
    const auto text = slurp(dir / "sweep.csv");
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
    CHECK(cli({"sweep", "--seed", "1"}, nullptr, &err) == exit_config);
}
