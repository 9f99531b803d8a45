// End-to-end checks of the command-line tool: exit-code contract, output
// idempotence, and cross-command consistency, driven through a real corpus.

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "leadoff/kernel.hpp"
#include "leadoff/solution_io.hpp"
#include "leadoff/util.hpp"

namespace {

struct CliResult {
  int code = -1;
  std::string out;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Scratch directory shared by every test in this binary, populated lazily.
const std::string& work_dir() {
  static const std::string dir = [] {
    std::string tmpl = "/tmp/leadoff_cli_XXXXXX";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s", tmpl.c_str());
    const char* d = mkdtemp(buf);
    REQUIRE(d != nullptr);
    return std::string(d);
  }();
  return dir;
}

CliResult run_cli(const std::string& args) {
  const std::string so = work_dir() + "/last_stdout.txt";
  const std::string se = work_dir() + "/last_stderr.txt";
  const std::string cmd =
      std::string(LEADOFF_CLI_BIN) + " " + args + " >" + so + " 2>" + se;
  int rc = std::system(cmd.c_str());
  CliResult r;
  r.code = WEXITSTATUS(rc);
  r.out = slurp(so);
  return r;
}

const std::string kConfig = std::string(LEADOFF_DATA_DIR) + "/generator_config.json";
const std::string kCoeffs = std::string(LEADOFF_DATA_DIR) + "/coeffs_synthetic.json";

// Corpus, kernels, and solutions used by the consistency tests; built once.
struct Pipeline {
  std::string plays, k2, k1, s2vi, s2pi, s1;
};

const Pipeline& pipeline() {
  static const Pipeline p = [] {
    Pipeline f;
    const std::string& d = work_dir();
    f.plays = d + "/plays.csv";
    f.k2 = d + "/two_player.kern";
    f.k1 = d + "/one_player.kern";
    f.s2vi = d + "/sol_vi.json";
    f.s2pi = d + "/sol_pi.json";
    f.s1 = d + "/sol_one.json";
    REQUIRE(run_cli("generate --config " + kConfig + " --coeffs " + kCoeffs + " --out " +
                    f.plays + " --innings 800 --seed 77")
                .code == 0);
    REQUIRE(run_cli("build-transitions --plays " + f.plays + " --coeffs " + kCoeffs +
                    " --mode two-player --out " + f.k2)
                .code == 0);
    REQUIRE(run_cli("build-transitions --plays " + f.plays + " --coeffs " + kCoeffs +
                    " --mode one-player --out " + f.k1)
                .code == 0);
    REQUIRE(run_cli("solve --kernel " + f.k2 + " --method vi --out " + f.s2vi).code == 0);
    REQUIRE(run_cli("solve --kernel " + f.k2 + " --method pi --out " + f.s2pi).code == 0);
    REQUIRE(run_cli("solve --kernel " + f.k1 + " --out " + f.s1).code == 0);
    return f;
  }();
  return p;
}

double start_value(const std::string& solution_path) {
  nlohmann::json j;
  std::ifstream in(solution_path);
  in >> j;
  return j.at("values").at(0).get<double>();
}

}  // namespace

TEST_CASE("usage errors exit with code 2") {
  CHECK(run_cli("").code == 2);                                    // no subcommand
  CHECK(run_cli("frobnicate").code == 2);                          // unknown subcommand
  CHECK(run_cli("build-transitions --plays x.csv --out k").code == 2);  // missing --coeffs
  CHECK(run_cli("solve --kernel k").code == 2);                    // missing --out
  CHECK(run_cli("tables --solution s.json --by bogus").code == 2); // unknown axis
  CHECK(run_cli("--help").code == 0);
}

TEST_CASE("missing input files exit with code 5") {
  const std::string& d = work_dir();
  CHECK(run_cli("solve --kernel " + d + "/nope.kern --out " + d + "/x.json").code == 5);
  CHECK(run_cli("build-transitions --plays " + d + "/nope.csv --coeffs " + kCoeffs +
                " --out " + d + "/x.kern")
            .code == 5);
  CHECK(run_cli("generate --config " + d + "/nope.json --coeffs " + kCoeffs + " --out " + d +
                "/x.csv")
            .code == 5);
}

TEST_CASE("kernels that admit indefinite play are refused with exit 4") {
  using namespace leadoff;
  const std::string path = work_dir() + "/evasion.kern";
  // state 0 loops on itself forever; the terminal is unreachable from it
  KernelBuilder b(3, 2, KernelMode::generic);
  b.begin_state(0, 1, 1);
  b.add_row({{0, {1.0, 0.0}}});
  b.begin_state(1, 1, 1);
  b.add_row({{2, {1.0, 0.0}}});
  b.begin_state(2, 1, 1);
  b.add_row({{2, {1.0, 0.0}}});
  TransitionKernel k = b.finish();
  save_kernel(path, k);

  CliResult r = run_cli("solve --kernel " + path + " --out " + work_dir() + "/evasion_sol.json");
  CHECK(r.code == 4);
}

TEST_CASE("generate is idempotent and seed-sensitive") {
  const std::string& d = work_dir();
  const std::string a = d + "/gen_a.csv", b = d + "/gen_b.csv", c = d + "/gen_c.csv";
  const std::string base =
      "generate --config " + kConfig + " --coeffs " + kCoeffs + " --innings 120";
  REQUIRE(run_cli(base + " --seed 5 --out " + a).code == 0);
  REQUIRE(run_cli(base + " --seed 5 --out " + b).code == 0);
  REQUIRE(run_cli(base + " --seed 6 --out " + c).code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a) != slurp(c));
  CHECK(slurp(a + ".manifest.json") == slurp(b + ".manifest.json"));
}

TEST_CASE("build and solve outputs are byte-identical across reruns") {
  const Pipeline& p = pipeline();
  const std::string& d = work_dir();
  const std::string k = d + "/rerun.kern", s = d + "/rerun_sol.json";
  REQUIRE(run_cli("build-transitions --plays " + p.plays + " --coeffs " + kCoeffs +
                  " --mode two-player --out " + k)
              .code == 0);
  CHECK(slurp(k) == slurp(p.k2));
  REQUIRE(run_cli("solve --kernel " + k + " --method vi --out " + s).code == 0);
  CHECK(slurp(s) == slurp(p.s2vi));
}

TEST_CASE("vi and pi agree through the CLI") {
  const Pipeline& p = pipeline();
  CHECK(start_value(p.s2vi) == Catch::Approx(start_value(p.s2pi)).margin(1e-8));
}

TEST_CASE("loose and tight tolerances give nearby values") {
  const Pipeline& p = pipeline();
  const std::string loose = work_dir() + "/sol_loose.json";
  REQUIRE(run_cli("solve --kernel " + p.k2 + " --tol 1e-4 --out " + loose).code == 0);
  CHECK(std::abs(start_value(loose) - start_value(p.s2vi)) < 1e-3);
}

TEST_CASE("the dominance chain is visible through the CLI") {
  const Pipeline& p = pipeline();
  CHECK(start_value(p.s1) >= start_value(p.s2vi) - 1e-9);
}

TEST_CASE("solution files reference the manifest that produced them") {
  const Pipeline& p = pipeline();
  nlohmann::json j;
  std::ifstream in(p.s2vi);
  in >> j;
  const std::string mh = j.at("provenance").at("manifest_hash").get<std::string>();
  const std::string body = slurp(p.s2vi + ".manifest.json");
  CHECK(mh == leadoff::hex64(leadoff::fnv1a64(body)));
  // the kernel's own manifest hash is carried through
  CHECK(j.at("provenance").contains("kernel_manifest_hash"));
}

TEST_CASE("tables render every axis") {
  const Pipeline& p = pipeline();

  CliResult by_count = run_cli("tables --solution " + p.s2vi + " --by count");
  REQUIRE(by_count.code == 0);
  CHECK(by_count.out.find("count") != std::string::npos);
  CHECK(by_count.out.find("3-2") != std::string::npos);
  CHECK(by_count.out.find("d=2") != std::string::npos);

  CliResult by_outs = run_cli("tables --solution " + p.s2vi + " --by outs");
  REQUIRE(by_outs.code == 0);
  CHECK(by_outs.out.find("outs") != std::string::npos);

  CliResult two_foot = run_cli("tables --solution " + p.s1 + " --by two-foot");
  REQUIRE(two_foot.code == 0);
  CHECK(two_foot.out.find("mean increment d0->d1") != std::string::npos);

  // csv file output carries the manifest reference in its header line
  const std::string csv = work_dir() + "/by_count.csv";
  REQUIRE(run_cli("tables --solution " + p.s2vi + " --by count --out " + csv).code == 0);
  CHECK(slurp(csv).rfind("# manifest ", 0) == 0);
  const std::string csv2 = work_dir() + "/by_count_again.csv";
  REQUIRE(run_cli("tables --solution " + p.s2vi + " --by count --out " + csv2).code == 0);
  CHECK(slurp(csv) == slurp(csv2));
}

TEST_CASE("players tables run one solve per skill pair") {
  const Pipeline& p = pipeline();
  CliResult r = run_cli("tables --solution " + p.s2vi + " --by players --plays " + p.plays +
                        " --coeffs " + kCoeffs + " --players 0.1:0.9 --players 0.9:0.1");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("b0.10/r0.90") != std::string::npos);
  CHECK(r.out.find("b0.90/r0.10") != std::string::npos);

  // players mode without the corpus inputs is a data error
  CHECK(run_cli("tables --solution " + p.s2vi + " --by players").code == 5);
}

TEST_CASE("simulate agrees with the dynamic-programming value and is seeded") {
  const Pipeline& p = pipeline();
  const std::string args = "simulate --kernel " + p.k2 + " --solution " + p.s2vi +
                           " --innings 40000 --seed 7";
  CliResult a = run_cli(args);
  REQUIRE(a.code == 0);
  CHECK(a.out.find("): ok") != std::string::npos);
  CliResult b = run_cli(args);
  CHECK(a.out == b.out);  // identical seeds, identical report bytes

  CliResult c = run_cli("simulate --kernel " + p.k2 + " --solution " + p.s2vi +
                        " --innings 40000 --seed 8");
  CHECK(c.out != a.out);
}

TEST_CASE("empirical policy simulation needs a one-player kernel") {
  const Pipeline& p = pipeline();
  CliResult ok = run_cli("simulate --kernel " + p.k1 + " --policy empirical --plays " +
                         p.plays + " --innings 20000 --seed 3");
  REQUIRE(ok.code == 0);
  CHECK(ok.out.find("empirical policy") != std::string::npos);
  CHECK(ok.out.find("): ok") != std::string::npos);

  CHECK(run_cli("simulate --kernel " + p.k2 + " --policy empirical --plays " + p.plays +
                " --innings 1000 --seed 3")
            .code == 5);
  CHECK(run_cli("simulate --kernel " + p.k1 + " --innings 1000 --seed 3").code == 5);
}

TEST_CASE("solution files survive a load round trip") {
  const Pipeline& p = pipeline();
  // loading and re-saving must reproduce the file byte for byte
  using namespace leadoff;
  const std::string again = work_dir() + "/resaved.json";
  Solution s = load_solution(p.s2vi);
  save_solution(again, s);
  CHECK(slurp(again) == slurp(p.s2vi));
}
