#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "support.hpp"
#include "tcomplete/media.hpp"
#include "tcomplete/tensor_io.hpp"

namespace fs = std::filesystem;
namespace tc = tcomplete;
using tc::Dims;
using tc::Tensor3;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / (std::string("tcomplete_cli_") +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  CliResult run(const std::string& args) const {
    const fs::path out = dir_ / "stdout.txt", err = dir_ / "stderr.txt";
    const std::string cmd = std::string(TCOMPLETE_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
  }

  /// Small piecewise-smooth RGB image written as PNG.
  fs::path small_image(const std::string& name = "img.png") const {
    const fs::path p = dir_ / name;
    tc::save_stack(tc::testing::piecewise_smooth_image(24, 20, 3), p);
    return p;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, MaskFromReferenceImage) {
  const fs::path lena = fs::path(TCOMPLETE_TEST_DATA) / "astronaut256.png";
  const CliResult r = run("mask --like " + lena.string() + " --sr 0.1 --seed 42 -o " + (dir_ / "a.msk3").string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto mask = tc::read_mask(dir_ / "a.msk3");
  EXPECT_EQ(mask.dims(), (Dims{256, 256, 3}));
  EXPECT_EQ(mask.count(), 19661u);
  EXPECT_NE(r.out.find("sr="), std::string::npos);
  ASSERT_EQ(run("mask --like " + lena.string() + " --sr 0.1 --seed 42 -o " + (dir_ / "b.msk3").string()).code, 0);
  EXPECT_EQ(slurp(dir_ / "a.msk3"), slurp(dir_ / "b.msk3"));
}

TEST_F(CliTest, MaskArgumentErrors) {
  EXPECT_EQ(run("mask --dims 4,4,2 --sr 1.5 -o " + (dir_ / "x.msk3").string()).code, 2);
  EXPECT_EQ(run("mask --dims 4,4 --sr 0.5 -o " + (dir_ / "x.msk3").string()).code, 2);
  EXPECT_EQ(run("mask --sr 0.5 -o " + (dir_ / "x.msk3").string()).code, 2);
  EXPECT_EQ(run("mask --dims 4,4,2 --sr 0.5").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("mask --like " + (dir_ / "missing.png").string() + " --sr 0.5 -o " + (dir_ / "x.msk3").string()).code, 3);
  EXPECT_EQ(run("mask --dims 4,4,2 --sr 0.5 -o " + (dir_ / "x.msk3").string()).code, 0);
  EXPECT_EQ(tc::read_mask(dir_ / "x.msk3").count(), 16u);
}

TEST_F(CliTest, CompleteWritesArtifactsAndEchoesDefaults) {
  const fs::path img = small_image();
  const fs::path out = dir_ / "run";
  const CliResult r = run("complete -i " + img.string() + " --sr 0.5 --seed 3 --method tnn-tv2 --max-iter 40 -o " + out.string());
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"recovered.png", "recovered.tns3", "log.csv", "manifest.txt", "mask.msk3"})
    EXPECT_TRUE(fs::exists(out / f)) << f;
  std::map<std::string, std::string> manifest;
  {
    std::istringstream is(slurp(out / "manifest.txt"));
    std::string line;
    while (std::getline(is, line))
      if (const auto eq = line.find('='); line[0] != '#' && eq != std::string::npos) manifest[line.substr(0, eq)] = line.substr(eq + 1);
  }
  EXPECT_EQ(manifest["method"], "tnn-tv2");
  EXPECT_EQ(std::stod(manifest["lambda"]), 1.0);
  EXPECT_EQ(std::stod(manifest["beta1"]), 0.01);
  EXPECT_EQ(std::stod(manifest["beta2"]), 1e-4);
  EXPECT_EQ(std::stod(manifest["tol"]), 1e-4);
  EXPECT_EQ(std::stod(manifest["mask_sr"]), 0.5);
  EXPECT_EQ(manifest["mask_seed"], "3");
  EXPECT_EQ(manifest["max_iter"], "40");
  EXPECT_EQ(manifest["mask_source"], "generated");
  EXPECT_FALSE(manifest["started_at"].empty());
  EXPECT_FALSE(manifest["finished_at"].empty());
  EXPECT_NE(r.out.find("psnr="), std::string::npos);
  EXPECT_NE(r.out.find("iterations="), std::string::npos);
  const std::string log = slurp(out / "log.csv");
  EXPECT_EQ(log.substr(0, log.find('\n')), "iter,rel_change,res_split,res_tv,objective,rse,psnr");
  EXPECT_EQ(tc::read_tensor(out / "recovered.tns3").dims(), (Dims{24, 20, 3}));
}

TEST_F(CliTest, LambdaIgnoredWarningForTnn) {
  const fs::path img = small_image();
  const CliResult r = run("complete -i " + img.string() + " --sr 0.5 --method tnn --lambda 5 --max-iter 5 -o " +
                    (dir_ / "run").string());
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("--lambda is ignored"), std::string::npos) << r.err;
}

TEST_F(CliTest, FullObservationReportsZeroRse) {
  const fs::path img = small_image();
  ASSERT_EQ(run("mask --like " + img.string() + " --sr 1 -o " + (dir_ / "full.msk3").string()).code, 0);
  const CliResult r = run("complete -i " + img.string() + " --mask " + (dir_ / "full.msk3").string() + " --ground-truth " +
                    img.string() + " -o " + (dir_ / "run").string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("rse=0 "), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("psnr=inf"), std::string::npos) << r.out;
}

TEST_F(CliTest, NonConvergenceIsAWarning) {
  const fs::path img = small_image();
  const CliResult r = run("complete -i " + img.string() + " --sr 0.3 --max-iter 2 -o " + (dir_ / "run").string());
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("warning"), std::string::npos);
}

TEST_F(CliTest, CompleteErrors) {
  const fs::path img = small_image();
  EXPECT_EQ(run("complete -i " + img.string() + " -o " + (dir_ / "r").string()).code, 2);  // no mask source
  EXPECT_EQ(run("complete -i " + img.string() + " --sr 0.5 --method tv9 -o " + (dir_ / "r").string()).code, 2);
  EXPECT_EQ(run("complete -i " + img.string() + " --sr 0.5 --beta1 -1 -o " + (dir_ / "r").string()).code, 2);
  EXPECT_EQ(run("complete -i " + (dir_ / "nope.png").string() + " --sr 0.5 -o " + (dir_ / "r").string()).code, 3);
  ASSERT_EQ(run("mask --dims 2,2,2 --sr 0.5 -o " + (dir_ / "m.msk3").string()).code, 0);
  EXPECT_EQ(run("complete -i " + img.string() + " --mask " + (dir_ / "m.msk3").string() + " -o " + (dir_ / "r").string()).code, 2);
}

TEST_F(CliTest, FrameGlobBuildsStack) {
  const Tensor3 frames = tc::testing::piecewise_smooth_image(16, 12, 4);
  tc::save_stack(frames, dir_ / "f.pgm");
  const CliResult r = run("complete -i '" + (dir_ / "f_*.pgm").string() + "' --sr 0.6 --max-iter 10 -o " + (dir_ / "run").string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(tc::read_tensor(dir_ / "run" / "recovered.tns3").dims(), (Dims{16, 12, 4}));
  EXPECT_TRUE(fs::exists(dir_ / "run" / "recovered_0003.pgm"));
}

TEST_F(CliTest, ReplayFromManifestIsBitIdentical) {
  const fs::path img = small_image();
  ASSERT_EQ(run("complete -i " + img.string() + " --sr 0.4 --seed 9 --method tnn-tv1 --max-iter 30 -o " +
                (dir_ / "a").string()).code, 0);
  const CliResult r = run("complete --replay " + (dir_ / "a" / "manifest.txt").string() + " -o " + (dir_ / "b").string());
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"recovered.png", "recovered.tns3", "log.csv", "mask.msk3"})
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
}

TEST_F(CliTest, BenchGridAndDeterminism) {
  fs::create_directories(dir_ / "corpus");
  small_image("corpus/one.png");
  const std::string args = "bench --images " + (dir_ / "corpus").string() +
                           " --sr 0.1,0.2 --methods tnn,tnn-tv1,tnn-tv2 --seed 4 --max-iter 15 -o ";
  ASSERT_EQ(run(args + (dir_ / "t1.csv").string()).code, 0);
  ASSERT_EQ(run(args + (dir_ / "t2.csv").string()).code, 0);
  auto strip_seconds = [](const std::string& csv) {
    std::istringstream is(csv);
    std::string line, out;
    std::vector<std::string> rows;
    while (std::getline(is, line)) {
      const auto last = line.rfind(',');
      const auto secs = line.rfind(',', last - 1);
      out += line.substr(0, secs) + line.substr(last) + "\n";
    }
    return out;
  };
  const std::string t1 = slurp(dir_ / "t1.csv");
  EXPECT_EQ(std::count(t1.begin(), t1.end(), '\n'), 7);
  EXPECT_EQ(t1.substr(0, t1.find('\n')), "image,sr,method,rse,psnr,seconds,iters");
  EXPECT_EQ(strip_seconds(t1), strip_seconds(slurp(dir_ / "t2.csv")));

  ASSERT_EQ(run(args + (dir_ / "t.md").string()).code, 0);
  EXPECT_EQ(slurp(dir_ / "t.md").substr(0, 9), "| image |");

  fs::create_directories(dir_ / "empty");
  EXPECT_NE(run("bench --images " + (dir_ / "empty").string()).code, 0);
}
