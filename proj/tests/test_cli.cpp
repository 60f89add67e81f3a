#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ddec/cli.hpp"
#include "ddec/io.hpp"

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

using namespace ddec;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "ddec");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("ddec_cli_test_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
  static inline int counter = 0;
};

} // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(run({}) == 2);
  CHECK(run({"frobnicate"}) == 2);
  CHECK(run({"generate"}) == 2);                                    // missing --out
  CHECK(run({"generate", "--out", "/nonexistent/dir/xyz"}) == 2);   // missing directory
  CHECK(run({"verify", "--model", "/nonexistent/model.txt"}) == 2); // missing file
}

TEST_CASE("generate, train, verify, solve, export pipeline") {
  TempDir dir;
  CHECK(run({"generate", "--case", "d1", "--fine", "8", "--parts", "2", "--out",
             dir.path.string()}) == 0);
  CHECK(fs::exists(dir.file("manifest.txt")));
  CHECK(fs::exists(dir.file("coarse.txt")));
  CHECK(fs::exists(dir.file("sample_0.txt")));

  const std::string model = dir.file("model.txt");
  const std::string history = dir.file("history.csv");
  CHECK(run({"train", "--data", dir.path.string(), "--epochs", "40", "--lr", "0.05", "--out",
             model, "--history", history}) == 0);
  CHECK(fs::exists(model));
  CHECK(fs::exists(history));
  {
    std::ifstream h(history);
    std::string header;
    std::getline(h, header);
    CHECK(header == "epoch,sample,loss,forward_residual,eps_lipschitz,grad_norm");
  }

  CHECK(run({"verify", "--model", model}) == 0);

  const std::string state = dir.file("state.txt");
  const std::string profile = dir.file("profile.csv");
  CHECK(run({"solve", "--model", model, "--sample", dir.file("sample_0.txt"), "--out", state,
             "--coarse", dir.file("coarse.txt"), "--profile", profile}) == 0);
  CHECK(fs::exists(state));
  CHECK(fs::exists(profile));

  const std::string profile2 = dir.file("profile2.csv");
  CHECK(run({"export", "--coarse", dir.file("coarse.txt"), "--state", state, "--out",
             profile2}) == 0);
  CHECK(io::slurp(profile) == io::slurp(profile2));

  // profile has one row per distinct centroid column and a csv header
  std::ifstream p(profile);
  std::string line;
  std::getline(p, line);
  CHECK(line == "x,value");
  int rows = 0;
  while (std::getline(p, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 2); // 2x2 partition of an 8x8 grid: two centroid columns
}

TEST_CASE("train exits 3 when the loss target is missed") {
  TempDir dir;
  REQUIRE(run({"generate", "--case", "d1", "--fine", "8", "--parts", "2", "--out",
               dir.path.string()}) == 0);
  CHECK(run({"train", "--data", dir.path.string(), "--epochs", "1", "--target", "1e-30", "--out",
             dir.file("m.txt")}) == 3);
}

TEST_CASE("coarsen a written fine complex") {
  TempDir dir;
  const ChainComplex fine = build_cartesian_complex(6, 6, 1.0, 1.0);
  io::save_complex(dir.file("fine.txt"), fine);

  CHECK(run({"coarsen", "--complex", dir.file("fine.txt"), "--px", "3", "--py", "3", "--out",
             dir.file("coarse.txt")}) == 0);
  const CoarseComplex cc = io::load_coarse(dir.file("coarse.txt"));
  CHECK(cc.coarse.count(2) == 9);

  CHECK(run({"coarsen", "--complex", dir.file("fine.txt"), "--parts", "4", "--out",
             dir.file("coarse_greedy.txt")}) == 0);
  CHECK(io::load_coarse(dir.file("coarse_greedy.txt")).coarse.count(2) == 4);
}

TEST_CASE("magneto pipeline") {
  TempDir dir;
  CHECK(run({"generate", "--case", "magneto", "--fine", "8", "--parts", "2", "--alphas", "1",
             "2", "--out", dir.path.string()}) == 0);
  CHECK(fs::exists(dir.file("sample_1.txt")));
  CHECK(run({"train", "--data", dir.path.string(), "--epochs", "20", "--out",
             dir.file("m.txt")}) == 0);
  CHECK(run({"verify", "--model", dir.file("m.txt")}) == 0);
}
