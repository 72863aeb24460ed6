// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "jppnet/core/errors.hpp"
#include "jppnet/core/random.hpp"
#include "jppnet/net/checkpoint.hpp"
#include "jppnet/net/config.hpp"
#include "jppnet/net/jppnet.hpp"
#include "test_util.hpp"

namespace jpp::net {
namespace {

NetConfig small(int input = 64, int stages = 1) {
  NetConfig c = NetConfig::toy();
  c.input_size = input;
  c.refine_stages = stages;
  return c;
}

Tensor<float> random_image(int size, std::uint64_t seed) {
  Tensor<float> t({3, size, size});
  Rng rng(seed);
  for (float& v : t.values()) v = static_cast<float>(rng.uniform(-1, 1));
  return t;
}

std::vector<int> shape_of(const Var<float>& v) { return v->value.shape(); }

TEST(NetConfig, PresetsAndValidation) {
  const NetConfig full = NetConfig::full();
  EXPECT_EQ(full.part_channels, (std::array<int, 2>{512, 256}));
  EXPECT_EQ(full.joint_channels, (std::array<int, 8>{512, 512, 256, 256, 256, 256, 512, 16}));
  EXPECT_EQ(full.refine_concat, 512);
  EXPECT_EQ(full.refine_channels, (std::array<int, 5>{512, 256, 256, 256, 256}));
  EXPECT_EQ(full.refine_kernels, (std::array<int, 5>{3, 5, 7, 9, 1}));
  EXPECT_EQ(full.output_size(), 48);
  const NetConfig toy = NetConfig::toy();
  EXPECT_EQ(toy.refine_kernels, full.refine_kernels);
  EXPECT_EQ(toy.parsing_context_channels() * 8, full.parsing_context_channels());
  EXPECT_EQ(toy.output_size(), 16);

  NetConfig bad = toy;
  bad.refine_concat += 1;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = toy;
  bad.input_size = 100;
  EXPECT_THROW(bad.validate(), ConfigError);
  EXPECT_EQ(NetConfig::from_json(full.to_json()), full);
  EXPECT_THROW(NetConfig::from_config(io::KeyValueConfig::parse("preset = huge\n")), ConfigError);
}

TEST(JppNet, StageCountsAndShapes) {
  for (int stages : {0, 1, 2}) {
    const JppNet<float> net(small(64, stages), 1);
    nn::NoGradGuard guard;
    const auto out = net.forward(random_image(64, 2));
    ASSERT_EQ(out.size(), static_cast<std::size_t>(1 + stages));
    for (const auto& s : out) {
      EXPECT_EQ(shape_of(s.parsing), (std::vector<int>{20, 8, 8}));
      EXPECT_EQ(shape_of(s.pose), (std::vector<int>{16, 8, 8}));
      EXPECT_EQ(shape_of(s.parsing_context)[1], 8);
      EXPECT_EQ(shape_of(s.pose_context)[2], 8);
    }
  }
  const JppNet<float> wide(small(128, 0), 1);
  nn::NoGradGuard guard;
  EXPECT_EQ(shape_of(wide.forward(random_image(128, 2))[0].parsing), (std::vector<int>{20, 16, 16}));
}

TEST(JppNet, ToyTraceFollowsTheLayerLadder) {
  NetConfig c = small(64, 1);
  const JppNet<float> net(c, 3);
  std::vector<LayerTrace> trace;
  net.set_trace(&trace);
  nn::NoGradGuard guard;
  net.forward(random_image(64, 4));
  auto find = [&](const std::string& name) {
    auto it = std::find_if(trace.begin(), trace.end(),
                           [&](const LayerTrace& t) { return t.name == name; });
    EXPECT_NE(it, trace.end()) << name;
    return it == trace.end() ? std::vector<int>{} : it->shape;
  };
  EXPECT_EQ(find("part.conv-2")[0], c.part_channels[1]);
  EXPECT_EQ(find("joint.conv-6")[0], c.joint_channels[5]);
  EXPECT_EQ(find("joint.conv-8")[0], 16);
  EXPECT_EQ(find("pose_refine1.concat")[0], c.refine_concat);
  EXPECT_EQ(find("parsing_refine1.concat")[0], c.refine_concat);
  EXPECT_EQ(find("pose_refine1.conv-6")[0], 16);
  EXPECT_EQ(find("parsing_refine1.aspp")[0], 20);
}

TEST(JppNet, ParsingOnlyNetworkHasNoPose) {
  NetConfig c = small(64, 0);
  c.with_pose = false;
  const JppNet<float> net(c, 1);
  for (const auto& [name, v] : net.parameters().entries()) {
    EXPECT_EQ(name.find("joint."), std::string::npos) << name;
  }
  nn::NoGradGuard guard;
  const auto out = net.forward(random_image(64, 1));
  ASSERT_EQ(out.size(), 1U);
  EXPECT_FALSE(out[0].pose);
}

TEST(JppNet, DeterministicAndNameSeededInitialisation) {
  const JppNet<float> a(small(64, 1), 9), b(small(64, 2), 9);
  EXPECT_EQ(a.parameters().get("part.conv-1.weight")->value.values().size(),
            b.parameters().get("part.conv-1.weight")->value.values().size());
  const auto& wa = a.parameters().get("pose_refine1.conv-3.weight")->value;
  const auto& wb = b.parameters().get("pose_refine1.conv-3.weight")->value;
  EXPECT_TRUE(std::equal(wa.values().begin(), wa.values().end(), wb.values().begin()));
  nn::NoGradGuard guard;
  const Tensor<float> img = random_image(64, 5);
  const auto o1 = a.forward(img), o2 = a.forward(img);
  const auto p1 = o1.back().parsing->value.values(), p2 = o2.back().parsing->value.values();
  EXPECT_TRUE(std::equal(p1.begin(), p1.end(), p2.begin()));
}

TEST(JppNet, AsppFusesRatesBySummation) {
  // A {1, 2} pyramid whose rate-2 branch is zeroed matches a lone rate-1 head
  // carrying the same weights.
  NetConfig one = small(64, 0);
  one.aspp_rates = {1};
  NetConfig two = one;
  two.aspp_rates = {1, 2};
  JppNet<float> a(one, 4), b(two, 4);
  for (const char* suffix : {".weight", ".bias"}) {
    b.parameters().get(std::string("part.aspp.rate1") + suffix)->value =
        a.parameters().get(std::string("part.aspp.rate1") + suffix)->value;
    b.parameters().get(std::string("part.aspp.rate2") + suffix)->value.fill(0.0F);
  }
  nn::NoGradGuard guard;
  const Tensor<float> img = random_image(64, 6);
  const auto oa = a.forward(img), ob = b.forward(img);
  const auto pa = oa[0].parsing->value.values();
  const auto pb = ob[0].parsing->value.values();
  ASSERT_EQ(pa.size(), pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_NEAR(pa[i], pb[i], 1e-5F);
}

TEST(JppNet, MultiScaleFusionKeepsOutputShape) {
  NetConfig c = small(64, 1);
  c.msc = true;
  const JppNet<float> net(c, 2);
  nn::NoGradGuard guard;
  const auto out = net.forward(random_image(64, 3));
  for (const auto& s : out) {
    EXPECT_EQ(shape_of(s.parsing), (std::vector<int>{20, 8, 8}));
    for (float v : s.pose->value.values()) ASSERT_TRUE(std::isfinite(v));
  }
}

TEST(JppNet, RejectsSizesOffTheStrideGrid) {
  const JppNet<float> net(small(64, 0), 1);
  nn::NoGradGuard guard;
  EXPECT_THROW(net.forward(Tensor<float>({3, 60, 64})), ShapeError);
  EXPECT_EQ(scaled_size(384, 0.75, 8), 288);
  EXPECT_EQ(scaled_size(100, 0.5, 8), 48);
  EXPECT_EQ(scaled_size(16, 0.1, 8), 8);
}

TEST(Checkpoint, RoundTripAndStrictLoading) {
  testing::TempDir dir("ckpt");
  const JppNet<float> a(small(64, 1), 5);
  Checkpoint ck;
  ck.net = a.config();
  ck.meta["note"] = "x";
  store_weights(a, ck);
  write_checkpoint(dir / "m.ckpt", ck);
  const Checkpoint back = read_checkpoint(dir / "m.ckpt");
  EXPECT_EQ(back.net, ck.net);
  EXPECT_EQ(back.meta, ck.meta);
  EXPECT_EQ(back.tensors.size(), a.parameters().entries().size());

  JppNet<float> b(small(64, 1), 77);
  EXPECT_EQ(load_weights(b, back, true), a.parameters().entries().size());
  nn::NoGradGuard guard;
  const Tensor<float> img = random_image(64, 8);
  const auto oa = a.forward(img), ob = b.forward(img);
  const auto pa = oa[1].pose->value.values();
  const auto pb = ob[1].pose->value.values();
  EXPECT_TRUE(std::equal(pa.begin(), pa.end(), pb.begin()));

  JppNet<float> bigger(small(64, 2), 1);
  EXPECT_THROW(load_weights(bigger, back, true), DataError);
  EXPECT_EQ(load_weights(bigger, back, false), back.tensors.size());

  testing::write_file(dir / "junk.ckpt", "not a checkpoint");
  EXPECT_THROW(read_checkpoint(dir / "junk.ckpt"), DataError);
}

}  // namespace
}  // namespace jpp::net
