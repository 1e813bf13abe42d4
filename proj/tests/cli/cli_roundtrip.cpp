// Runs make_synthetic, then every analyze subcommand on its output, and
// checks the JSON reports against the generating parameters.

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

using nlohmann::json;

namespace {

int failures = 0;

std::string quote(const std::string& s) { return "'" + s + "'"; }

int run(const std::string& cmd) {
  std::printf("$ %s\n", cmd.c_str());
  std::fflush(stdout);
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

json load(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::printf("FAIL missing %s\n", path.c_str());
    ++failures;
    return json::object();
  }
  return json::parse(in);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void expect_near(const char* label, double value, double truth, double err, double k = 4.0) {
  const bool ok = std::isfinite(value) && err > 0.0 && std::abs(value - truth) <= k * err;
  std::printf("%s %-14s %.6g +- %.3g (truth %.6g)\n", ok ? "PASS" : "FAIL", label, value, err, truth);
  failures += !ok;
}

void expect(bool ok, const char* label) {
  std::printf("%s %s\n", ok ? "PASS" : "FAIL", label);
  failures += !ok;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 4) {
    std::fprintf(stderr, "usage: cli_roundtrip <atomsim> <make_synthetic> <workdir>\n");
    return 2;
  }
  const std::string cli = quote(argv[1]), gen = quote(argv[2]), out = argv[3];
  const std::string data = out + "/data";

  if (run(gen + " --out " + quote(data) + " --seed 7") != 0) return 1;
  auto analyze = [&](const std::string& name, const std::string& args) {
    const int rc = run(cli + " --out " + quote(out + "/" + name) + " analyze " + args);
    expect(rc == 0, ("analyze " + name + " exits 0").c_str());
    return load(out + "/" + name + "/analyze_" + name + ".json");
  };

  auto h = analyze("histogram", "histogram --input " + quote(data + "/histogram.csv"));
  if (h.contains("fit")) expect_near("tau_ns", h["fit"]["tau_ns"], 30.4, h["fit"]["tau_err_ns"]);

  auto r = analyze("ramsey", "ramsey --input " + quote(data + "/ramsey.csv"));
  if (r.contains("fit") && r["fit"].contains("t2_us")) {
    expect_near("t2_us", r["fit"]["t2_us"], 130.0, r["fit"]["t2_err_us"]);
    expect_near("ramsey_hz", r["fit"]["frequency_hz"], 20e3, r["fit"]["frequency_err_hz"]);
  } else {
    expect(false, "ramsey fit reports t2_us");
  }

  auto b = analyze("rabi", "rabi --input " + quote(data + "/rabi.csv"));
  if (b.contains("fit"))
    expect_near("rabi_omega", b["fit"]["omega_rad_per_s"], 2.0 * M_PI * 109e3, b["fit"]["omega_err_rad_per_s"]);

  auto f = analyze("fidelity", "fidelity --input " + quote(data + "/parity_X.csv") + " " + quote(data + "/parity_Y.csv") +
                                   " " + quote(data + "/parity_Z.csv"));
  if (f.contains("fidelity")) expect_near("fidelity", f["fidelity"]["value"], 0.94175, f["fidelity"]["error"]);

  auto g = analyze("g2", "g2 --attempts 200000 --input " + quote(data + "/time_tags.csv"));
  if (g.contains("g2")) expect_near("g2", g["g2"]["value"], 1.0, g["g2"]["error"]);

  // Same inputs, same bytes.
  const std::string again = out + "/again";
  run(cli + " --out " + quote(again) + " analyze fidelity --input " + quote(data + "/parity_X.csv") + " " +
      quote(data + "/parity_Y.csv") + " " + quote(data + "/parity_Z.csv"));
  std::string a1 = slurp(out + "/fidelity/analyze_fidelity.json"), a2 = slurp(again + "/analyze_fidelity.json");
  auto strip = [](std::string s, const std::string& dir) {
    for (auto p = s.find(dir); p != std::string::npos; p = s.find(dir)) s.erase(p, dir.size());
    return s;
  };
  expect(strip(a1, out + "/fidelity") == strip(a2, again), "fidelity report is byte-identical across runs");

  std::printf("%d failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
