#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("vpatch_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

int run(const std::string& args) {
  const std::string cmd = std::string("\"") + VPATCH_CLI + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Every output except the manifest byte for byte; the manifest up to its wall time.
bool same_outputs(const fs::path& a, const fs::path& b) {
  for (const auto& e : fs::directory_iterator(a)) {
    const auto name = e.path().filename();
    if (!fs::exists(b / name)) return false;
    if (name == "manifest.json") {
      auto ja = nlohmann::json::parse(slurp(a / name)), jb = nlohmann::json::parse(slurp(b / name));
      ja.erase("wall_seconds");
      jb.erase("wall_seconds");
      ja["config"].erase("out");
      jb["config"].erase("out");
      if (ja != jb) return false;
    } else if (slurp(a / name) != slurp(b / name)) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("spectrum table") {
  const auto out = scratch("spectrum");
  REQUIRE(run("spectrum --b 0.5 --jmax 5 --out " + out.string()) == 0);
  std::ifstream in(out / "omega.csv");
  std::string line;
  bool found = false;
  while (std::getline(in, line))
    if (line.rfind("2,", 0) == 0) {
      const double v = std::stod(line.substr(2, line.find(',', 2) - 2));
      CHECK(v == doctest::Approx(0.53125).epsilon(1e-15));
      found = true;
    }
  CHECK(found);
  CHECK(fs::exists(out / "manifest.json"));
  auto m = nlohmann::json::parse(slurp(out / "manifest.json"));
  CHECK(m["subcommand"] == "spectrum");
  CHECK(m.contains("wall_seconds"));
}

TEST_CASE("simulate from the equilibrium") {
  const auto out = scratch("flat");
  REQUIRE(run("simulate --b 0.5 --M 32 --T 0.1 --dt 0.01 --stride 1 --out " + out.string()) == 0);
  auto s = nlohmann::json::parse(slurp(out / "summary.json"));
  CHECK(s["status"] == "ok");
}

TEST_CASE("exit codes") {
  CHECK(run("spectrum --b 1.5 --out " + scratch("bad").string()) == 1);
  CHECK(run("kam-remainder --out " + scratch("noseed").string()) == 1);
  CHECK(run("nonsense") == 1);
  // Invalid values coming from a config file.
  const auto cfg = scratch("cfg");
  fs::create_directories(cfg);
  std::ofstream(cfg / "c.json") << R"({"b": -0.2})";
  CHECK(run("simulate --config " + (cfg / "c.json").string() + " --out " + (cfg / "o").string()) == 1);
}

TEST_CASE("byte-identical reruns") {
  const std::string args[] = {
      "cantor --gamma 1e-3 --sites 1,2 --lmax 6",
      "kam-remainder --seed 42 --L 8 --J 10 --steps 2",
      "kam-transport --phi-grid 16 --M 32 --steps 4",
      "simulate --amplitudes 2:1e-3 --M 32 --T 0.5 --dt 0.01 --modes 2",
      "linearize --amplitudes 2:1e-3,3:5e-4 --M 64 --N 8",
  };
  int k = 0;
  for (const auto& a : args) {
    const auto o1 = scratch("rep1_" + std::to_string(k)), o2 = scratch("rep2_" + std::to_string(k));
    ++k;
    REQUIRE(run(a + " --out " + o1.string()) == 0);
    REQUIRE(run(a + " --out " + o2.string()) == 0);
    CHECK_MESSAGE(same_outputs(o1, o2), a);
  }
}
