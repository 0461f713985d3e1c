#include "kslab/config.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "kslab/errors.hpp"
#include "testing.hpp"

using namespace kslab;

namespace {

void testBasicParsing() {
  std::cout << "Testing key = value parsing..." << std::endl;
  const std::string text =
      "# run setup\n"
      "model.a = 2.5\n"
      "solver.n=1024\n"
      "   wave.c   =  3.0   # trailing comment\n"
      "\n"
      "speed.mode = lab\n"
      "flag.on = true\n"
      "flag.off = 0\n";
  RunConfig cfg = RunConfig::parse(text, "inline");
  CHECK(cfg.has("model.a"));
  CHECK(!cfg.has("model.b"));
  CHECK(cfg.get_double("model.a", 0.0) == 2.5);
  CHECK(cfg.get_size("solver.n", 0) == 1024);
  CHECK(cfg.get_double("wave.c", 0.0) == 3.0);
  CHECK(cfg.get_string("speed.mode", "frame") == "lab");
  CHECK(cfg.get_bool("flag.on", false) == true);
  CHECK(cfg.get_bool("flag.off", true) == false);
  cfg.reject_unknown();  // every key consumed above
}

void testDefaultsAndResolution() {
  std::cout << "Testing fallback values and the resolved echo..." << std::endl;
  RunConfig cfg = RunConfig::parse("model.a = 0.1\n", "inline");
  CHECK(cfg.get_double("model.a", 1.0) == 0.1);
  CHECK(cfg.get_double("model.b", 1.75) == 1.75);
  CHECK(cfg.get_size("solver.n", 2048) == 2048);
  CHECK(cfg.get_bool("wave.start_lower", false) == false);
  CHECK(cfg.get_string("speed.mode", "lab") == "lab");
  cfg.reject_unknown();

  const auto& res = cfg.resolved();
  CHECK(res.size() == 5);
  CHECK(res.at("model.a") == "0.1");
  CHECK(res.at("model.b") == "1.75");
  CHECK(res.at("solver.n") == "2048");
  CHECK(res.at("wave.start_lower") == "false");
  CHECK(res.at("speed.mode") == "lab");

  // The echo re-ingests to the same values.
  std::string echo;
  for (const auto& [k, v] : res) echo += k + " = " + v + "\n";
  RunConfig cfg2 = RunConfig::parse(echo, "echo");
  CHECK(cfg2.get_double("model.a", 0.0) == 0.1);
  CHECK(cfg2.get_double("model.b", 0.0) == 1.75);
  CHECK(cfg2.get_size("solver.n", 0) == 2048);
}

void testErrors() {
  std::cout << "Testing parse and lookup errors..." << std::endl;
  CHECK_THROWS(RunConfig::parse("model.a\n", "f"), ConfigError);       // missing '='
  CHECK_THROWS(RunConfig::parse(" = 3\n", "f"), ConfigError);          // empty key
  CHECK_THROWS(RunConfig::parse("a = 1\na = 2\n", "f"), ConfigError);  // duplicate

  // Errors carry the origin and line number.
  try {
    RunConfig::parse("ok = 1\nbroken line\n", "myfile");
    CHECK(false);
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("myfile:2") != std::string::npos);
  }
  try {
    RunConfig::parse("a = 1\nb = 2\na = 3\n", "dup");
    CHECK(false);
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("dup:3") != std::string::npos);
    CHECK(msg.find("first set on line 1") != std::string::npos);
  }

  RunConfig cfg = RunConfig::parse("model.a = fast\nsolver.n = 12.5\nflag = maybe\n", "f");
  CHECK_THROWS(cfg.get_double("model.a", 1.0), ConfigError);
  CHECK_THROWS(cfg.get_size("solver.n", 1), ConfigError);
  CHECK_THROWS(cfg.get_bool("flag", true), ConfigError);

  // Unconsumed keys are named.
  RunConfig cfg2 = RunConfig::parse("model.a = 1\nsolvre.n = 99\n", "f");
  cfg2.get_double("model.a", 0.0);
  try {
    cfg2.reject_unknown();
    CHECK(false);
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("solvre.n") != std::string::npos);
  }
}

void testLoadFromDisk() {
  std::cout << "Testing file loading..." << std::endl;
  const std::string path = "test_config_roundtrip.cfg";
  {
    std::ofstream out(path);
    out << "model.a = 4\nmodel.tau = 0.5\n";
  }
  RunConfig cfg = RunConfig::load(path);
  CHECK(cfg.get_double("model.a", 0.0) == 4.0);
  CHECK(cfg.get_double("model.tau", 0.0) == 0.5);
  std::remove(path.c_str());

  CHECK_THROWS(RunConfig::load("definitely_missing_file.cfg"), ConfigError);
}

}  // namespace

int main() {
  testBasicParsing();
  testDefaultsAndResolution();
  testErrors();
  testLoadFromDisk();
  return test_summary("run configuration");
}
