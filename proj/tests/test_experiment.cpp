#include "spotvol/experiment.hpp"
#include "spotvol/io.hpp"
#include "spotvol/tables.hpp"

#include "property_checks.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

using namespace spotvol;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("spotvol_test_" + name);
    fs::remove_all(p);
    return p;
}

ExperimentConfig config(const std::map<std::string, std::string>& kv)
{
    ExperimentConfig cfg;
    apply_config(cfg, kv);
    return cfg;
}

}  // namespace

TEST(MatrixSeriesFile, RoundTripIsExact)
{
    MatrixSeries s;
    s.push_back(0.1, (Matrix(2, 2) << 1.0 / 3, -2e-300, 1e300, std::nextafter(1.0, 2.0)).finished());
    s.push_back(0.2, Matrix::Identity(2, 2));
    std::stringstream ss;
    write_matrix_series(ss, s);
    EXPECT_EQ(ss.str().substr(0, 14), "p,2,times,2\nt,");
    const MatrixSeries back = read_matrix_series(ss);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back.times, s.times);
    EXPECT_EQ(back.matrices[0], s.matrices[0]);
}

TEST(MatrixSeriesFile, MalformedInput)
{
    std::istringstream bad("p,2,times,1\nt,0\n1,2\n");
    EXPECT_THROW(read_matrix_series(bad), InvalidArgument);
    std::istringstream header("q,2\n");
    EXPECT_THROW(read_matrix_series(header), InvalidArgument);
}

TEST(ConfigFile, KeyValues)
{
    std::istringstream in("# comment\nsim.p = 4\n  kernel.h_star=120 # trailing\n\n");
    const auto kv = parse_key_values(in);
    EXPECT_EQ(kv.at("sim.p"), "4");
    EXPECT_EQ(kv.at("kernel.h_star"), "120");
    std::istringstream dup("sim.p = 4\nsim.p = 5\n");
    EXPECT_THROW(parse_key_values(dup), InvalidArgument);
    std::istringstream nodot("p = 4\n");
    EXPECT_THROW(parse_key_values(nodot), InvalidArgument);
}

TEST(ConfigFile, UnknownKeyIsAnError)
{
    try {
        config({{"kernel.bandwith", "0.1"}});
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.key(), "kernel.bandwith");
    }
}

TEST(ConfigFile, InvalidValues)
{
    EXPECT_THROW(config({{"run.mode", "estimate_everything"}}), ConfigError);
    EXPECT_THROW(config({{"sim.p", "-3"}}), ConfigError);
    EXPECT_THROW(config({{"sim.noise", "maybe"}}), ConfigError);
    EXPECT_THROW(config({{"run.mode", "estimate_spot"}}).validate(), ConfigError);
    EXPECT_THROW(config({{"run.mode", "table_repro"}, {"run.table", "table9_banding"}}).validate(), ConfigError);
}

TEST(ConfigFile, RuleParameters)
{
    const ExperimentConfig cfg = config({{"shrink.a", "4.2"}, {"shrink.rule", "scad"}});
    ASSERT_TRUE(cfg.rule);
    EXPECT_EQ(cfg.rule->kind, ShrinkKind::scad);
    EXPECT_EQ(cfg.rule->a, 4.2);
    EXPECT_FALSE(config({{"shrink.rule", "none"}}).shrinkage());
}

TEST(ConfigFile, CanonicalFormIgnoresThreads)
{
    ExperimentConfig a = config({{"sim.p", "4"}});
    ExperimentConfig b = a;
    b.threads = 8;
    EXPECT_EQ(canonical_config(a), canonical_config(b));
    b.seed = 2;
    EXPECT_NE(canonical_config(a), canonical_config(b));
}

TEST(Experiment, SimulateIsByteIdenticalOnRerun)
{
    const fs::path root = scratch("determinism");
    const auto r = checks::seed_determinism(root.string());
    EXPECT_TRUE(r.ok) << r.detail;
    const std::string manifest = read_file((root / "a" / "manifest.txt").string());
    for (const char* f : {"panel_clean.csv", "truth_sigma.txt", "truth_integrated.txt", "truth_beta.csv", "config_hash", "seed,7"}) {
        EXPECT_NE(manifest.find(f), std::string::npos) << f;
    }
    fs::remove_all(root);
}

TEST(Experiment, ManifestHashesMatchFiles)
{
    const fs::path root = scratch("manifest");
    ExperimentConfig cfg = config({{"run.mode", "simulate"}, {"sim.p", "4"}, {"sim.n", "100"}, {"run.seed", "7"}});
    cfg.output_dir = root.string();
    std::ostringstream log;
    ASSERT_EQ(run_experiment(cfg, log), 0);
    std::istringstream manifest(read_file((root / "manifest.txt").string()));
    std::string line;
    int files = 0;
    while (std::getline(manifest, line)) {
        if (line.rfind("file,", 0) != 0) continue;
        const auto comma = line.find(',', 5);
        const std::string name = line.substr(5, comma - 5);
        EXPECT_EQ(line.substr(comma + 1), hex64(fnv1a64(read_file((root / name).string()))));
        ++files;
    }
    std::size_t on_disk = 0;
    for (const auto& e : fs::directory_iterator(root)) on_disk += e.path().filename() != "manifest.txt";
    EXPECT_EQ(static_cast<std::size_t>(files), on_disk);
    fs::remove_all(root);
}

TEST(Experiment, SimulateEstimateEvaluatePipeline)
{
    const fs::path root = scratch("pipeline");
    std::ostringstream log;
    ExperimentConfig sim = config({{"run.mode", "simulate"}, {"sim.p", "5"}, {"sim.n", "390"}, {"run.seed", "3"}});
    sim.output_dir = (root / "sim").string();
    ASSERT_EQ(run_experiment(sim, log), 0);

    ExperimentConfig est = config({{"run.mode", "estimate_spot"},
                                   {"run.input", (root / "sim" / "panel_clean.csv").string()},
                                   {"load.time_format", "years"},
                                   {"load.take_log", "false"},
                                   {"kernel.h_star", "60"},
                                   {"shrink.rule", "soft"}});
    est.output_dir = (root / "est").string();
    ASSERT_EQ(run_experiment(est, log), 0) << log.str();
    EXPECT_TRUE(fs::exists(root / "est" / "shrinkage.csv"));

    ExperimentConfig ev = config({{"run.mode", "evaluate"},
                                  {"run.input", (root / "est" / "sigma_hat.txt").string()},
                                  {"run.truth_input", (root / "sim" / "truth_sigma.txt").string()}});
    ev.output_dir = (root / "eval").string();
    ASSERT_EQ(run_experiment(ev, log), 0);
    EXPECT_NE(read_file((root / "eval" / "summary.csv").string()).find("mfl,"), std::string::npos);

    ExperimentConfig prec = config({{"run.mode", "estimate_precision"},
                                    {"run.input", (root / "sim" / "truth_sigma.txt").string()},
                                    {"clime.rho", "0.05"}});
    prec.output_dir = (root / "prec").string();
    ASSERT_EQ(run_experiment(prec, log), 0);
    EXPECT_EQ(read_matrix_series_file((root / "prec" / "precision.txt").string()).size(), 21u);

    ExperimentConfig noise = config({{"run.mode", "estimate_noisecov"},
                                     {"run.input", (root / "sim" / "panel_noisy.csv").string()},
                                     {"load.time_format", "years"},
                                     {"load.take_log", "false"}});
    noise.output_dir = (root / "noise").string();
    ASSERT_EQ(run_experiment(noise, log), 0);

    ExperimentConfig missing = est;
    missing.input = (root / "nope.csv").string();
    missing.output_dir = (root / "missing").string();
    EXPECT_EQ(run_experiment(missing, log), 3);
    fs::remove_all(root);
}

TEST(Experiment, TableReproLayoutAndThreadInvariance)
{
    const fs::path root = scratch("table");
    std::ostringstream log;
    ExperimentConfig cfg = config({{"run.mode", "table_repro"}, {"run.table", "table1_banding"}, {"run.replications", "2"}});
    cfg.output_dir = (root / "t1").string();
    ASSERT_EQ(run_experiment(cfg, log), 0);
    cfg.threads = 2;
    cfg.output_dir = (root / "t2").string();
    ASSERT_EQ(run_experiment(cfg, log), 0);
    const std::string a = read_file((root / "t1" / "table.csv").string());
    EXPECT_EQ(a, read_file((root / "t2" / "table.csv").string()));
    for (const char* est : {"sigma_hat", "sigma_tilde", "omega_hat"}) {
        for (const char* rule : {"Naive", "Hard", "Soft", "AL", "SCAD"}) {
            EXPECT_NE(a.find(std::string(",") + est + "," + rule + ","), std::string::npos) << est << rule;
        }
    }
    fs::remove_all(root);
}

TEST(Tables, Targets)
{
    EXPECT_EQ(table_targets().size(), 21u);
    const TableSpec t = table_spec("tableD3_banding");
    EXPECT_EQ(t.kind, TableKind::integrated);
    EXPECT_EQ(t.p, 500u);
    EXPECT_THROW(table_spec("table1"), InvalidArgument);
}
