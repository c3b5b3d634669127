#include "spotvol/io.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args)
{
    const std::string cmd = std::string(SPOTVOL_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Cli, ExitCodes)
{
    const fs::path dir = fs::temp_directory_path() / "spotvol_cli_test";
    fs::remove_all(dir);
    EXPECT_EQ(run("--set run.mode=bogus simulate -o " + dir.string()), 2);
    EXPECT_EQ(run("--set kernel.bandwith=1 simulate -o " + dir.string()), 2);
    EXPECT_EQ(run("simulate --p notanumber -o " + dir.string()), 2);
    EXPECT_EQ(run("--no-such-flag simulate"), 2);
    EXPECT_EQ(run("precision -i " + (dir / "missing.txt").string() + " -o " + dir.string()), 3);
    EXPECT_EQ(run("--seed 7 simulate --p 4 --n 100 -o " + (dir / "sim").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "sim" / "manifest.txt"));
    EXPECT_TRUE(fs::exists(dir / "sim" / "panel_noisy.csv"));
    fs::remove_all(dir);
}

TEST(Cli, ConfigFileAndOverrides)
{
    const fs::path dir = fs::temp_directory_path() / "spotvol_cli_config";
    fs::remove_all(dir);
    fs::create_directories(dir);
    {
        std::ofstream cfg(dir / "run.cfg");
        cfg << "run.mode = simulate\nsim.p = 3\nsim.n = 60\nsim.noise = false\nrun.seed = 11\n";
    }
    ASSERT_EQ(run("--config " + (dir / "run.cfg").string() + " -o " + (dir / "a").string() + " simulate"), 0);
    ASSERT_EQ(run("--config " + (dir / "run.cfg").string() + " --threads 4 -o " + (dir / "b").string() + " simulate"), 0);
    EXPECT_FALSE(fs::exists(dir / "a" / "panel_noisy.csv"));
    EXPECT_EQ(spotvol::read_file((dir / "a" / "panel_clean.csv").string()),
              spotvol::read_file((dir / "b" / "panel_clean.csv").string()));
    {
        std::ofstream cfg(dir / "bad.cfg");
        cfg << "sim.p = 3\nsim.colour = red\n";
    }
    EXPECT_EQ(run("--config " + (dir / "bad.cfg").string() + " simulate -o " + dir.string()), 2);
    fs::remove_all(dir);
}
