#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
  static const fs::path dir = [] {
    const fs::path p = fs::temp_directory_path() / "phylokit_cli_test";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(const std::string& args) {
  const fs::path out = workdir() / "stdout.txt", err = workdir() / "stderr.txt";
  const std::string cmd = std::string("\"") + PHYLOKIT_CLI_PATH + "\" " + args + " >\"" +
                          out.string() + "\" 2>\"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::string at(const std::string& name) { return "\"" + (workdir() / name).string() + "\""; }

}  // namespace

TEST_CASE("help and version") {
  const auto help = cli("--help");
  CHECK(help.code == 0);
  for (const char* sub : {"synth", "train", "reconstruct", "evaluate", "export-params"})
    CHECK(help.out.find(sub) != std::string::npos);
  CHECK(cli("reconstruct --help").code == 0);
  const auto v = cli("--version");
  CHECK(v.code == 0);
  CHECK(v.out.find('.') != std::string::npos);
}

TEST_CASE("usage errors exit with 1") {
  CHECK(cli("").code == 1);
  CHECK(cli("frobnicate").code == 1);
  CHECK(cli("synth --out " + at("u")).code == 1);                        // missing --shape
  CHECK(cli("train --synthetic 10 --family fourier --out " + at("m.json")).code == 1);
  CHECK(cli("synth --procedural 1 --shape fig4a --class sideways --out " + at("u")).code == 1);
  CHECK(cli("evaluate --recon a.json --recon b.json --truth t.json --out " + at("r.json")).code == 1);
  CHECK(cli("train --synthetic 10 --manifest x.json --out " + at("m.json")).code == 1);
}

TEST_CASE("library errors exit with 2") {
  // Paths that do not exist are caught while parsing arguments.
  CHECK(cli("reconstruct --images " + at("nowhere") + " --model " + at("missing.json") +
            " --out " + at("r.json"))
            .code == 1);
  CHECK(cli("train --synthetic 1 --out " + at("m.json")).code == 1);

  std::ofstream(workdir() / "broken.json") << "{\"family\": ";
  fs::create_directories(workdir() / "empty");
  const auto r = cli("reconstruct --images " + at("empty") + " --model " + at("broken.json") +
                     " --out " + at("r.json"));
  CHECK(r.code == 2);
  CHECK(r.err.find("phylokit: error") != std::string::npos);
  CHECK(cli("synth --procedural 1 --shape edges:0-1,1-0 --out " + at("bad")).code == 2);
  CHECK(cli("evaluate --recon " + at("broken.json") + " --truth " + at("broken.json") + " --out " +
            at("r.json"))
            .code == 2);
}

TEST_CASE("full pipeline") {
  REQUIRE(cli("-q synth --procedural 7 --size 48 --shape fig5-3 --seed 3 --out " + at("data")).code == 0);
  CHECK(fs::exists(workdir() / "data" / "manifest.json"));

  const auto train = cli("train --synthetic 30 --seed 2 --family legendre --out " + at("model.json"));
  REQUIRE(train.code == 0);
  CHECK_FALSE(train.err.empty());  // progress goes to stderr
  CHECK(train.out.empty());

  const auto from_manifest = cli("-q train --manifest " + at("data/manifest.json") +
                                 " --family legendre --out " + at("model2.json"));
  CHECK(from_manifest.code == 0);

  REQUIRE(cli("-q -j 2 reconstruct --images " + at("data") + " --model " + at("model.json") +
              " --out " + at("recon.json") + " --dot " + at("recon.dot"))
              .code == 0);
  CHECK(slurp(workdir() / "recon.dot").find("digraph") != std::string::npos);
  CHECK(cli("-q reconstruct --images " + at("data") + " --model " + at("model.json") +
            " --family gabor --out " + at("x.json"))
            .code == 1);

  const std::string eval = "-q evaluate --recon " + at("recon.json") + " --truth " +
                           at("data/manifest.json");
  REQUIRE(cli(eval + " --out " + at("report1.json") + " --csv " + at("report1.csv")).code == 0);
  REQUIRE(cli(eval + " --out " + at("report2.json")).code == 0);
  CHECK(slurp(workdir() / "report1.json") == slurp(workdir() / "report2.json"));
  CHECK(slurp(workdir() / "report1.json").find("mean_ipt_accuracy") != std::string::npos);

  REQUIRE(cli("-q export-params --manifest " + at("data/manifest.json") +
              " --family gabor --out " + at("params.csv"))
              .code == 0);
  CHECK(slurp(workdir() / "params.csv").rfind("pair,direction,family", 0) == 0);
}
