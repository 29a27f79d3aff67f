// End-to-end tests of the command-line tool: every subcommand is driven
// through a real process, and the reports, output files, and exit codes
// are checked against the library.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hpl/circuit.hpp"
#include "hpl/circuit_io.hpp"

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

using nlohmann::json;

namespace {

const std::string kBin = HPL_BIN;
const std::string kData = HPL_DATA_DIR;
const std::string kScratch = HPL_BUILD_DIR;

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

RunResult run(const std::string& args) {
  const std::string out_path = kScratch + "/cli_stdout.txt";
  const std::string err_path = kScratch + "/cli_stderr.txt";
  const std::string cmd = kBin + " " + args + " > " + out_path + " 2> " + err_path;
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  return r;
}

// Parses a CSV with a header into (header, numeric rows).
std::pair<std::string, std::vector<std::vector<double>>> read_csv(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      row.push_back(std::stod(cell));
    }
    rows.push_back(std::move(row));
  }
  return {header, rows};
}

}  // namespace

TEST_CASE("help and argument errors use the conventional exit codes") {
  CHECK(run("--help").exit_code == 0);
  CHECK(run("").exit_code == 2);                    // a subcommand is required
  CHECK(run("eval").exit_code == 2);                // missing circuit argument
  CHECK(run("eval --bogus-flag x.json").exit_code == 2);
  CHECK(run("frobnicate").exit_code == 2);
}

TEST_CASE("eval reports the CHSH score and herald probability of a circuit file") {
  const std::string out_path = kScratch + "/cli_eval_report.json";
  const RunResult r = run("eval " + kData + "/fig1.json --seed 9 --out " + out_path);
  REQUIRE(r.exit_code == 0);

  const json report = json::parse(r.out);
  CHECK(report.at("format").get<int>() == 1);
  CHECK(report.at("command").get<std::string>() == "eval");
  CHECK(report.at("seed").get<std::uint64_t>() == 9);
  const double chsh = report.at("chsh").get<double>();
  const double prob = report.at("herald_probability").get<double>();
  CHECK(chsh > 2.0657);
  CHECK(chsh < 2.0697);
  CHECK(prob > 2.0e-6);
  CHECK(prob < 4.0e-6);
  CHECK(report.at("correlators").size() == 4);
  CHECK(report.at("squeezing_db").is_array());
  CHECK(report.at("squeezing_db").size() == 2);  // the two two-mode squeezers
  for (const auto& entry : report.at("squeezing_db")) {
    CHECK(entry.contains("db"));
    CHECK(entry.contains("r"));
  }

  // The --out copy is the same document that went to stdout.
  CHECK(json::parse(slurp(out_path)) == report);
  std::remove(out_path.c_str());
}

TEST_CASE("eval rejects missing and malformed circuit files") {
  CHECK(run("eval " + kScratch + "/no_such_circuit.json").exit_code == 2);

  const std::string bad = kScratch + "/cli_bad_circuit.json";
  {
    std::ofstream out(bad);
    out << "{\"format\": 1, \"n_modes\": \"four\"}\n";
  }
  CHECK(run("eval " + bad).exit_code == 2);
  std::remove(bad.c_str());
}

TEST_CASE("optimize writes a circuit whose re-evaluation matches the report") {
  const std::string opt_path = kScratch + "/cli_fig1.optimized.json";
  const RunResult r = run("optimize " + kData + "/fig1.json --seed 4 --out " + opt_path);
  REQUIRE(r.exit_code == 0);

  const json report = json::parse(r.out);
  CHECK(report.at("command").get<std::string>() == "optimize");
  CHECK(report.at("output").get<std::string>() == opt_path);
  const double chsh = report.at("chsh").get<double>();
  CHECK(chsh > 2.067);  // at least as good as the starting point

  // Independent re-evaluation of the written circuit agrees exactly.
  const hpl::CircuitFile optimized = hpl::load_circuit_file(opt_path);
  const hpl::EvalResult again = hpl::evaluate_circuit(optimized.circuit, optimized.measurement);
  CHECK(std::abs(again.chsh - chsh) < 1e-9);
  CHECK(std::abs(again.herald_probability - report.at("herald_probability").get<double>()) <
        1e-9 * again.herald_probability + 1e-30);
  std::remove(opt_path.c_str());
}

TEST_CASE("optimize with an impossible herald floor exits with the infeasible code") {
  const std::string opt_path = kScratch + "/cli_fig1.should_not_exist.json";
  const RunResult r =
      run("optimize " + kData + "/fig1.json --herald-floor 2.9 --out " + opt_path);
  CHECK(r.exit_code == 3);
  CHECK(slurp(opt_path).empty());  // nothing written on failure
}

TEST_CASE("efficiency sweep writes the expected CSV grid") {
  const std::string csv_path = kScratch + "/cli_sweep_eta.csv";
  const RunResult r = run("sweep --kind efficiency " + kData +
                          "/fig1.json --eta-min 0.4 --eta-max 1.0 --eta-step 0.3 --out " +
                          csv_path);
  REQUIRE(r.exit_code == 0);
  const json report = json::parse(r.out);
  CHECK(report.at("kind").get<std::string>() == "efficiency");
  CHECK(report.at("points").get<int>() == 3);

  const auto [header, rows] = read_csv(csv_path);
  CHECK(header == "eta,chsh,herald_probability");
  REQUIRE(rows.size() == 3);
  const double etas[3] = {0.4, 0.7, 1.0};
  for (int i = 0; i < 3; ++i) {
    CHECK(rows[static_cast<std::size_t>(i)][0] == doctest::Approx(etas[i]).epsilon(1e-12));
  }
  // Less efficient detectors mean a weaker violation.
  CHECK(rows[0][1] < rows[1][1]);
  CHECK(rows[1][1] < rows[2][1]);
  CHECK(rows[2][1] > 2.0657);
  std::remove(csv_path.c_str());
}

TEST_CASE("distance sweep re-optimizes under loss and keeps the herald floor") {
  const std::string csv_path = kScratch + "/cli_sweep_km.csv";
  const RunResult r = run("sweep --kind distance " + kData +
                          "/fig1.json --max-km 1.0 --step-km 0.5 --out " + csv_path);
  REQUIRE(r.exit_code == 0);

  const auto [header, rows] = read_csv(csv_path);
  CHECK(header == "distance_km,chsh,herald_probability");
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(rows[i][0] == doctest::Approx(0.5 * static_cast<double>(i)).epsilon(1e-12));
    CHECK(rows[i][1] > 2.0);
  }
  CHECK(rows[2][1] < rows[0][1]);  // the violation decays with distance
  std::remove(csv_path.c_str());
}

TEST_CASE("random search is deterministic and ranks its results") {
  const std::string out_a = kScratch + "/cli_search_a.json";
  const std::string out_b = kScratch + "/cli_search_b.json";
  const std::string args =
      "search --strategy 3 --modes 4 --depth 5 --episodes 6 --seed 42 --out ";

  const RunResult ra = run(args + out_a + " --workers 2");
  REQUIRE(ra.exit_code == 0);
  const json summary = json::parse(ra.out);
  CHECK(summary.at("command").get<std::string>() == "search");
  CHECK(!summary.contains("results"));  // stdout carries the summary only
  CHECK(summary.at("out").get<std::string>() == out_a);

  const json full = json::parse(slurp(out_a));
  const auto& results = full.at("results");
  REQUIRE(results.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(results[i].at("rank").get<int>() == static_cast<int>(i) + 1);
    if (i > 0) {
      CHECK(results[i - 1].at("chsh").get<double>() >= results[i].at("chsh").get<double>());
    }
  }
  CHECK(full.at("best_chsh").get<double>() == results[0].at("chsh").get<double>());

  // A different worker count must not change the outcome.
  const RunResult rb = run(args + out_b + " --workers 1");
  REQUIRE(rb.exit_code == 0);
  CHECK(slurp(out_a) == slurp(out_b));
  std::remove(out_a.c_str());
  std::remove(out_b.c_str());
}

TEST_CASE("train runs, writes its artifacts, and resumes from a checkpoint") {
  const std::string trace = kScratch + "/cli_train_trace.csv";
  const std::string best = kScratch + "/cli_train_best.json";
  const std::string ck = kScratch + "/cli_train_ck.json";
  const std::string common = "train --strategy 3 --modes 4 --depth 5 --seed 11 ";

  const RunResult r = run(common + "--episodes 3 --trace " + trace + " --best-out " + best +
                          " --checkpoint " + ck);
  REQUIRE(r.exit_code == 0);
  const json report = json::parse(r.out);
  CHECK(report.at("command").get<std::string>() == "train");
  CHECK(report.at("episodes_done").get<long>() == 3);
  CHECK(report.at("checkpoint").get<std::string>() == ck);

  const auto [header, rows] = read_csv(trace);
  CHECK(header == "episode,chsh,best_chsh");
  REQUIRE(rows.size() == 3);
  double best_seen = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i][0] == doctest::Approx(static_cast<double>(i + 1)));
    best_seen = std::max(best_seen, rows[i][1]);
    CHECK(rows[i][2] == doctest::Approx(best_seen).epsilon(1e-9));
  }

  // The best circuit file loads as a valid circuit document.
  const hpl::CircuitFile best_file = hpl::load_circuit_file(best);
  CHECK(best_file.circuit.n_modes == 4);

  // Resuming continues the episode counter.
  const std::string trace2 = kScratch + "/cli_train_trace2.csv";
  const std::string best2 = kScratch + "/cli_train_best2.json";
  const RunResult r2 = run(common + "--episodes 2 --resume " + ck + " --trace " + trace2 +
                           " --best-out " + best2);
  REQUIRE(r2.exit_code == 0);
  CHECK(json::parse(r2.out).at("episodes_done").get<long>() == 5);
  const auto [header2, rows2] = read_csv(trace2);
  REQUIRE(rows2.size() == 2);
  CHECK(rows2[0][0] == doctest::Approx(4.0));  // numbering picks up where it left off

  for (const std::string& p : {trace, best, ck, trace2, best2}) {
    std::remove(p.c_str());
  }
}
