#include "cgnn/checkpoint.hpp"
#include "cgnn/config.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

using namespace cgnn;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cgnn_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ModelParams sample(bool weighted) {
  std::mt19937_64 rng(3);
  TrainConfig c;
  c.hidden = 5;
  c.variant = weighted ? Variant::CgnnWeight : Variant::Cgnn;
  ModelParams p = init_params(c, 7, 3, 9, rng);
  p.enc_bias.setLinSpaced(-1.0, 1.0);
  return p;
}

}  // namespace

TEST(Checkpoint, RoundTripAtFloatPrecision) {
  for (bool weighted : {false, true}) {
    const ModelParams p = sample(weighted);
    const fs::path dir = scratch(weighted ? "ckpt_w" : "ckpt");
    save_checkpoint(p, dir);
    const ModelParams q = load_checkpoint(dir);
    EXPECT_EQ(q.enc_weight, p.enc_weight.cast<float>().cast<double>());
    EXPECT_EQ(q.enc_bias, p.enc_bias.cast<float>().cast<double>());
    EXPECT_EQ(q.dec_weight, p.dec_weight.cast<float>().cast<double>());
    EXPECT_EQ(q.alpha_raw, p.alpha_raw.cast<float>().cast<double>());
    ASSERT_EQ(q.weight_spec.has_value(), weighted);
    if (weighted) {
      EXPECT_EQ(q.weight_spec->basis, p.weight_spec->basis.cast<float>().cast<double>());
    }
    EXPECT_EQ(fs::file_size(dir / kBlobName), static_cast<std::uintmax_t>(4 * param_count(p)));
  }
}

TEST(Checkpoint, ManifestListsTensorsInOrder) {
  const fs::path dir = scratch("manifest");
  save_checkpoint(sample(false), dir);
  std::ifstream in(dir / kManifestName);
  std::string text((std::istreambuf_iterator<char>(in)), {});
  EXPECT_EQ(text,
            "format cgnn-checkpoint\nversion 1\ndtype float32\nbyte_order little\nblob params.bin\n"
            "tensor enc_weight 7 5\ntensor enc_bias 5 1\ntensor dec_weight 5 3\ntensor dec_bias 3 1\n"
            "tensor alpha_raw 9 1\n");
}

TEST(Checkpoint, RejectsCorruption) {
  const fs::path dir = scratch("corrupt");
  save_checkpoint(sample(false), dir);
  fs::resize_file(dir / kBlobName, fs::file_size(dir / kBlobName) - 4);
  EXPECT_THROW(load_checkpoint(dir), ParseError);

  save_checkpoint(sample(false), dir);
  {
    std::ofstream out(dir / kBlobName, std::ios::binary | std::ios::app);
    out << "xxxx";
  }
  EXPECT_THROW(load_checkpoint(dir), ParseError);

  save_checkpoint(sample(false), dir);
  {
    std::ofstream out(dir / kManifestName, std::ios::app);
    out << "colour blue\n";
  }
  EXPECT_THROW(load_checkpoint(dir), ParseError);
  EXPECT_THROW(load_checkpoint(scratch("empty")), ParseError);
}

TEST(RunConfigJson, DefaultsAndOverrides) {
  const RunConfig rc = run_config_from_json(nlohmann::json::parse(
                                                R"({"lr": 0.0047, "optimizer": "rmsprop", "t1": 12.1,
                                                    "alpha_init": 0.918, "gamma": 0.555, "variant": "cgnn-weight",
                                                    "solver": "dopri5", "t_list": [5, 10], "seeds": [1, 2]})"),
                                            "/base");
  EXPECT_EQ(rc.train.lr, 0.0047);
  EXPECT_EQ(rc.train.optimizer, OptimizerKind::RmsProp);
  EXPECT_EQ(rc.train.variant, Variant::CgnnWeight);
  EXPECT_EQ(rc.train.solver, SolverMethod::AdaptiveRk45);
  EXPECT_EQ(rc.train.epochs, 400u);
  EXPECT_EQ(rc.t_list, (std::vector<double>{5, 10}));
  EXPECT_EQ(rc.output_dir, fs::path("/base/out"));
}

TEST(RunConfigJson, UnknownKeyAndBadValues) {
  try {
    run_config_from_json(nlohmann::json::parse(R"({"learning_rate": 0.1})"));
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("learning_rate"), std::string::npos);
  }
  EXPECT_THROW(run_config_from_json(nlohmann::json::parse(R"({"lr": "fast"})")), ParseError);
  EXPECT_THROW(run_config_from_json(nlohmann::json::parse(R"({"variant": "gat"})")), ParseError);
  EXPECT_THROW(run_config_from_json(nlohmann::json::parse(R"({"dropout": 1.0})")), DomainError);
  EXPECT_THROW(run_config_from_json(nlohmann::json::parse("[1]")), ParseError);
}

TEST(RunConfigJson, PathsRelativeToConfigFile) {
  const fs::path dir = scratch("cfg");
  fs::create_directories(dir / "sub");
  {
    std::ofstream out(dir / "sub" / "run.json");
    out << R"({"dataset_path": "../data/sbm", "output_dir": "results", "epochs": 3})";
  }
  const RunConfig rc = load_run_config(dir / "sub" / "run.json");
  EXPECT_EQ(rc.dataset_path.lexically_normal(), (dir / "data" / "sbm").lexically_normal());
  EXPECT_EQ(rc.output_dir, dir / "sub" / "results");
  EXPECT_THROW(load_run_config(dir / "nope.json"), ParseError);
}

TEST(RunConfigJson, RoundTrip) {
  RunConfig rc;
  rc.train.t1 = 7.5;
  rc.train.variant = Variant::CgnnDiscrete;
  rc.dataset_path = "/d";
  rc.output_dir = "/o";
  rc.variants = {Variant::Cgnn, Variant::CgnnNoRestart};
  rc.t_list = {5, 40};
  const RunConfig back = run_config_from_json(to_json(rc));
  EXPECT_EQ(to_json(back), to_json(rc));
}
