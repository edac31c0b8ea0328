#include <gtest/gtest.h>

#include "canon/error.hpp"
#include "canon/model_io.hpp"

using namespace canon;
using nlohmann::json;

TEST(ModelIo, FermiRoundTrip) {
  const json j = json::parse(R"({"fermi": {"k": 2, "m": 2, "beta": 1.5, "v": [0, 1], "n": [2, 3]}})");
  const ModelFile m = parse_model(j);
  ASSERT_TRUE(m.fermi.has_value());
  EXPECT_EQ(m.fermi->n, (std::vector<std::int64_t>{2, 3}));
  EXPECT_EQ(to_json(m), j);
  EXPECT_EQ(build_model(m).k(), 2);
}

TEST(ModelIo, CustomWithNegInf) {
  const json j = json::parse(R"({"custom": {"k": 2, "m": 2, "phi": [[0, 0, "-inf"], [0, -1, -3]]}})");
  const ModelFile m = parse_model(j);
  ASSERT_TRUE(m.custom.has_value());
  EXPECT_EQ(m.custom->phi[0][2], kNegInf);
  EXPECT_EQ(to_json(m), j);
  const ModelSpec spec = build_model(m);
  EXPECT_EQ(spec.potential(0).support_hi(), 1);
}

TEST(ModelIo, RejectsUnknownKeysAndShapes) {
  EXPECT_THROW(parse_model(json::parse(R"({"fermi": {"k": 2, "m": 2, "beta": 1, "v": [0, 1], "n": [2, 2], "x": 1}})")),
               std::invalid_argument);
  EXPECT_THROW(parse_model(json::parse(R"({"fermi": {"k": 2, "m": 2, "v": [0, 1], "n": [2, 2]}})")),
               std::invalid_argument);
  EXPECT_THROW(parse_model(json::parse(R"({"other": {}})")), std::invalid_argument);
  EXPECT_THROW(parse_model(json::parse(R"({"custom": {"k": 1, "m": 1, "phi": [[0, "oops"]]}})")),
               std::invalid_argument);
  EXPECT_THROW(build_model(parse_model(json::parse(R"({"fermi": {"k": 9, "m": 2, "beta": 1, "v": [0, 1], "n": [2, 2]}})"))),
               InfeasibleModel);
}

TEST(ModelIo, FormatAndHash) {
  EXPECT_EQ(format_real(0.1), "0.10000000000000001");
  EXPECT_EQ(format_real(kNegInf), "-inf");
  EXPECT_EQ(format_real(4.0), "4");
  const ModelSpec a = build_fermi(FermiSpec{2, 2, 1.0, {0, 1}, {2, 2}});
  const ModelSpec b = build_fermi(FermiSpec{2, 2, 1.0, {0, 1}, {2, 2}});
  const ModelSpec c = build_fermi(FermiSpec{2, 2, 1.0 + 1e-15, {0, 1}, {2, 2}});
  EXPECT_EQ(model_hash(a), model_hash(b));
  EXPECT_NE(model_hash(a), model_hash(c));
  EXPECT_EQ(model_hash(a).size(), 16u);
}
