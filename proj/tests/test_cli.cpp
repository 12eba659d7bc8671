// End-to-end tests that spawn the command-line binary (path injected by the
// build as LSFLOW_CLI_PATH).
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "lsflow/cli_io.hpp"

using namespace lsflow;
namespace fs = std::filesystem;

namespace {

struct TmpDir {
  fs::path p;
  TmpDir() {
    p = fs::temp_directory_path() / ("lsflow_cli_test_" + std::to_string(::getpid()) + "_" +
                                     std::to_string(counter()++));
    fs::create_directories(p);
  }
  ~TmpDir() { fs::remove_all(p); }
  std::string file(const std::string& name) const { return (p / name).string(); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

int run_cli(const std::string& args, const std::string& stdout_file = "") {
  std::string cmd = std::string(LSFLOW_CLI_PATH) + " " + args;
  cmd += stdout_file.empty() ? " > /dev/null" : " > " + stdout_file;
  cmd += " 2> /dev/null";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  REQUIRE(is.good());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::size_t line_count(const std::string& text) {
  std::size_t n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  os << text;
}

// a config small enough to train in well under a second
std::string tiny_config(const fs::path& data, const fs::path& out, int epochs, int seed) {
  std::ostringstream os;
  os << "[data]\n"
     << "p0 = " << (data / "p0.xyz").string() << "\n"
     << "p1 = " << (data / "p1.xyz").string() << "\n"
     << "correspondences = " << (data / "correspondences.txt").string() << "\n"
     << "output = " << out.string() << "\n"
     << "[train]\n"
     << "epochs = " << epochs << "\nbatch_size = 48\nlr = 0.005\nwarmup_epochs = " << epochs / 4
     << "\nramp_end = " << epochs / 2 << "\nvelocity_freeze_epoch = " << epochs - 2
     << "\nlr_decay_interval = " << epochs / 2 << "\nT = 6\nseed = " << seed
     << "\ncheckpoint_interval = " << epochs / 2 << "\n"
     << "[model]\nimplicit_width = 16\nimplicit_depth = 3\nvelocity_width = 16\n"
     << "velocity_depth = 3\nencoding_m = 1\n"
     << "[extract]\ntimes = 0,0.5,1\nresolution = 20\n";
  return os.str();
}

}  // namespace

TEST_CASE("cli: make-synthetic, train, extract, eval pipeline") {
  TmpDir tmp;
  REQUIRE(run_cli("make-synthetic --kind translated_sphere --out " + tmp.file("data") +
                  " --run-dir d --n 200 --seed 5 --gt-times 0,0.5,1 --gt-subdiv 2") == 0);
  const fs::path data = tmp.p / "data" / "d";
  for (const char* f : {"p0.xyz", "p1.xyz", "correspondences.txt", "manifest.json",
                        "gt/gt_t0.000.obj", "gt/gt_t0.500.obj", "gt/gt_t1.000.obj"})
    CHECK(fs::exists(data / f));
  CHECK(load_point_cloud((data / "p0.xyz").string()).size() == 200);

  write_text(tmp.file("run.cfg"), tiny_config(data, tmp.p / "runs", 60, 3));
  REQUIRE(run_cli("train --config " + tmp.file("run.cfg") + " --run-dir r1",
                  tmp.file("train_out.txt")) == 0);
  const fs::path run = tmp.p / "runs" / "r1";
  CHECK(slurp(tmp.file("train_out.txt")) == run.string() + "\n");

  // run directory layout
  for (const char* f : {"config.cfg", "metrics.csv", "timing.txt", "manifest.json",
                        "checkpoints/ckpt_000030.bin", "checkpoints/final.bin"})
    CHECK(fs::exists(run / f));
  const std::string metrics = slurp(run / "metrics.csv");
  CHECK(line_count(metrics) == 61);  // header + one row per epoch
  CHECK(metrics.rfind("epoch,", 0) == 0);

  // manifest cross-checks: config hash and input/output hashes are real
  const nlohmann::json man = nlohmann::json::parse(slurp(run / "manifest.json"));
  CHECK(man.at("command") == "train");
  CHECK(man.at("seed") == 3);
  char expect_hash[32];
  std::snprintf(expect_hash, sizeof expect_hash, "0x%016llx",
                static_cast<unsigned long long>(fnv1a64_file((run / "config.cfg").string())));
  CHECK(man.at("config_fnv1a64") == expect_hash);
  const auto& inputs = man.at("inputs");
  CHECK(inputs.size() == 3);
  char p0_hash[32];
  std::snprintf(p0_hash, sizeof p0_hash, "0x%016llx",
                static_cast<unsigned long long>(fnv1a64_file((data / "p0.xyz").string())));
  CHECK(inputs.at((data / "p0.xyz").string()) == p0_hash);
  CHECK(man.at("outputs").contains("metrics.csv"));

  // extract: one mesh per requested time, plus trajectories
  REQUIRE(run_cli("extract --checkpoint " + (run / "checkpoints" / "final.bin").string() +
                  " --times 0,0.5,1 --resolution 20 --out " + tmp.file("ex") +
                  " --run-dir e --trajectories 4") == 0);
  const fs::path ex = tmp.p / "ex" / "e";
  for (const char* f : {"meshes/mesh_t0.000.obj", "meshes/mesh_t0.500.obj",
                        "meshes/mesh_t1.000.obj", "trajectories/trajectories.csv",
                        "manifest.json"})
    CHECK(fs::exists(ex / f));
  const std::string traj = slurp(ex / "trajectories" / "trajectories.csv");
  CHECK(traj.rfind("seed,k,x,y,z", 0) == 0);
  CHECK(line_count(traj) == 1 + 4 * 7);  // header + 4 seeds x (T+1) steps

  // eval: CSV on stdout with four finite numbers
  REQUIRE(run_cli("eval --mesh " + (ex / "meshes" / "mesh_t0.500.obj").string() + " --gt " +
                  (data / "gt" / "gt_t0.500.obj").string() + " --samples 500 --seed 1",
                  tmp.file("eval.csv")) == 0);
  const std::string csv = slurp(tmp.file("eval.csv"));
  CHECK(csv.rfind("cd,hd,cd_scaled,hd_scaled\n", 0) == 0);
  std::istringstream row(csv.substr(csv.find('\n') + 1));
  double cd, hd, cds, hds;
  char comma;
  row >> cd >> comma >> hd >> comma >> cds >> comma >> hds;
  CHECK(row);
  CHECK(cd > 0.0);
  CHECK(hd >= cd);
  CHECK(cds == doctest::Approx(cd * 1e3));
  CHECK(hds == doctest::Approx(hd * 1e2));
}

TEST_CASE("cli: identically seeded runs produce byte-identical metrics") {
  TmpDir tmp;
  REQUIRE(run_cli("make-synthetic --kind translated_sphere --out " + tmp.file("data") +
                  " --run-dir d --n 120 --seed 2 --gt-times 0 --gt-subdiv 0") == 0);
  const fs::path data = tmp.p / "data" / "d";
  write_text(tmp.file("run.cfg"), tiny_config(data, tmp.p / "runs", 40, 11));
  REQUIRE(run_cli("train --config " + tmp.file("run.cfg") + " --run-dir a") == 0);
  REQUIRE(run_cli("train --config " + tmp.file("run.cfg") + " --run-dir b") == 0);
  const std::string ma = slurp(tmp.p / "runs" / "a" / "metrics.csv");
  const std::string mb = slurp(tmp.p / "runs" / "b" / "metrics.csv");
  CHECK(ma == mb);
  CHECK(slurp(tmp.p / "runs" / "a" / "checkpoints" / "final.bin") ==
        slurp(tmp.p / "runs" / "b" / "checkpoints" / "final.bin"));
}

TEST_CASE("cli: resume continues exactly where the checkpoint stopped") {
  TmpDir tmp;
  REQUIRE(run_cli("make-synthetic --kind translated_sphere --out " + tmp.file("data") +
                  " --run-dir d --n 120 --seed 2 --gt-times 0 --gt-subdiv 0") == 0);
  const fs::path data = tmp.p / "data" / "d";
  write_text(tmp.file("run.cfg"), tiny_config(data, tmp.p / "runs", 40, 11));
  REQUIRE(run_cli("train --config " + tmp.file("run.cfg") + " --run-dir full") == 0);
  REQUIRE(run_cli("train --config " + tmp.file("run.cfg") + " --run-dir part --resume " +
                  (tmp.p / "runs" / "full" / "checkpoints" / "ckpt_000020.bin").string()) == 0);

  const std::string full = slurp(tmp.p / "runs" / "full" / "metrics.csv");
  const std::string part = slurp(tmp.p / "runs" / "part" / "metrics.csv");
  CHECK(line_count(part) == 21);  // header + epochs 21..40
  // the resumed rows must be identical to the tail of the uninterrupted run
  std::size_t full_pos = 0;
  for (int skip = 0; skip < 21; ++skip) full_pos = full.find('\n', full_pos) + 1;
  CHECK(part.substr(part.find('\n') + 1) == full.substr(full_pos));
  CHECK(slurp(tmp.p / "runs" / "full" / "checkpoints" / "final.bin") ==
        slurp(tmp.p / "runs" / "part" / "checkpoints" / "final.bin"));
}

TEST_CASE("cli: exit codes distinguish config, divergence and io failures") {
  TmpDir tmp;
  REQUIRE(run_cli("make-synthetic --kind translated_sphere --out " + tmp.file("data") +
                  " --run-dir d --n 80 --seed 2 --gt-times 0 --gt-subdiv 0") == 0);
  const fs::path data = tmp.p / "data" / "d";

  // unknown config key -> 2
  write_text(tmp.file("bad_key.cfg"),
             "[data]\np0 = " + (data / "p0.xyz").string() + "\np1 = " +
                 (data / "p1.xyz").string() + "\n[train]\nepoch = 5\n");
  CHECK(run_cli("train --config " + tmp.file("bad_key.cfg")) == 2);

  // missing input file -> 4
  write_text(tmp.file("missing.cfg"),
             "[data]\np0 = " + tmp.file("nope.xyz") + "\np1 = " + (data / "p1.xyz").string() +
                 "\n");
  CHECK(run_cli("train --config " + tmp.file("missing.cfg")) == 4);

  // malformed --set -> 2
  write_text(tmp.file("ok.cfg"), tiny_config(data, tmp.p / "runs", 20, 1));
  CHECK(run_cli("train --config " + tmp.file("ok.cfg") + " --set epochs=5") == 2);

  // extraction time outside [0,1] -> 2 (needs a checkpoint first)
  REQUIRE(run_cli("train --config " + tmp.file("ok.cfg") + " --run-dir ok") == 0);
  const std::string ckpt = (tmp.p / "runs" / "ok" / "checkpoints" / "final.bin").string();
  CHECK(run_cli("extract --checkpoint " + ckpt + " --times 0,1.5 --resolution 12") == 2);

  // garbage checkpoint -> 4
  write_text(tmp.file("junk.bin"), "not a checkpoint");
  CHECK(run_cli("extract --checkpoint " + tmp.file("junk.bin") + " --times 0") == 4);
  CHECK(run_cli("extract --checkpoint " + tmp.file("absent.bin") + " --times 0") == 4);

  // missing required option -> 2 (argument parse error)
  CHECK(run_cli("train") == 2);
  CHECK(run_cli("frobnicate") == 2);

  // runaway learning rate -> 3
  std::string div_cfg = tiny_config(data, tmp.p / "runs", 30, 1);
  const std::string lr_key = "lr = 0.005";
  div_cfg.replace(div_cfg.find(lr_key), lr_key.size(), "lr = 1e160\ngrad_clip = 0");
  write_text(tmp.file("diverge.cfg"), div_cfg);
  CHECK(run_cli("train --config " + tmp.file("diverge.cfg") + " --run-dir div") == 3);
}

TEST_CASE("cli: ablate writes one summary row per variant and time") {
  TmpDir tmp;
  REQUIRE(run_cli("make-synthetic --kind translated_sphere --out " + tmp.file("data") +
                  " --run-dir d --n 120 --seed 2 --gt-times 0,0.5,1 --gt-subdiv 2") == 0);
  const fs::path data = tmp.p / "data" / "d";
  write_text(tmp.file("run.cfg"), tiny_config(data, tmp.p / "runs", 24, 4));

  REQUIRE(run_cli("ablate --config " + tmp.file("run.cfg") +
                  " --protocol formulation --run-dir ab --gt-dir " + (data / "gt").string() +
                  " --set extract.times=0,1 --set extract.resolution=16") == 0);
  const fs::path ab = tmp.p / "runs" / "ab";
  CHECK(fs::exists(ab / "variants" / "mlse" / "metrics.csv"));
  CHECK(fs::exists(ab / "variants" / "olse" / "metrics.csv"));
  CHECK(fs::exists(ab / "manifest.json"));
  const std::string summary = slurp(ab / "summary.csv");
  CHECK(summary.rfind("variant,t,final_total,eikonal,cd,hd", 0) == 0);
  CHECK(line_count(summary) == 1 + 2 * 2);  // two variants x two times

  CHECK(run_cli("ablate --config " + tmp.file("run.cfg") + " --protocol nonesuch") == 2);
}
