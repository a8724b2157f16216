#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "dcurve/renderer.hpp"
#include "fixtures.hpp"

using namespace dcurve;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
    fs::path d = fs::temp_directory_path() / ("dcurve_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
}

int run(const std::string& args) {
    std::string cmd = std::string(DCURVE_CLI) + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string write_scene(const fs::path& dir, const std::string& name, const std::string& text) {
    fs::path p = dir / name;
    std::ofstream(p) << text;
    return p.string();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Cli, RenderWritesPng) {
    fs::path d = scratch();
    std::string scene = write_scene(d, "corner.json", save_scene(verify::corner_scene()));
    std::string out = (d / "a.png").string();
    ASSERT_EQ(run("render " + scene + " -o " + out + " --res 32"), 0);
    Image img = read_png(out);
    EXPECT_EQ(img.width, 32);
    EXPECT_EQ(img.height, 32);

    std::string out2 = (d / "b.png").string();
    ASSERT_EQ(run("render " + scene + " -o " + out2 + " --res 32"), 0);
    EXPECT_EQ(slurp(out), slurp(out2));

    std::string out3 = (d / "c.png").string();
    ASSERT_EQ(run("render " + scene + " -o " + out3 + " --res 24 --no-aa --viewport 0,0,0.5,0.5"), 0);
    EXPECT_EQ(read_png(out3).width, 24);
    fs::remove_all(d);
}

TEST(Cli, UsageErrorsExitTwo) {
    fs::path d = scratch();
    std::string scene = write_scene(d, "corner.json", save_scene(verify::corner_scene()));
    std::string out = (d / "x.png").string();
    EXPECT_EQ(run(""), 2);
    EXPECT_EQ(run("render"), 2);
    EXPECT_EQ(run("render " + scene + " -o " + out + " --res 30"), 2);  // aa needs a power of two
    EXPECT_EQ(run("render " + scene + " -o " + out + " --viewport 1,2"), 2);
    EXPECT_EQ(run("render " + write_scene(d, "bad.json", "{") + " -o " + out), 2);
    EXPECT_EQ(run("render " + write_scene(d, "open.json",
                                          R"({"curves":[{"spans":[[[0,0],[0.3,0],[0.6,0],[1,0]]],)"
                                          R"("bc":{"type":"neumann"}}]})") +
                  " -o " + out),
              2);
    EXPECT_FALSE(fs::exists(out));
    fs::remove_all(d);
}

TEST(Cli, RuntimeFailureExitsOne) {
    fs::path d = scratch();
    std::string scene = write_scene(d, "corner.json", save_scene(verify::corner_scene()));
    EXPECT_EQ(run("render " + scene + " -o " + (d / "missing_dir" / "x.png").string() + " --res 16"), 1);
    // an unreadable scene is a bad argument
    EXPECT_EQ(run("render " + (d / "nope.json").string() + " -o " + (d / "x.png").string()), 2);
    fs::remove_all(d);
}

TEST(Cli, VerifyListsChecks) {
    EXPECT_EQ(run("verify --list"), 0);
    EXPECT_EQ(run("verify --suite no_such_check"), 2);
}
