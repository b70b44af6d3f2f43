#include <gtest/gtest.h>

#include "asbim/config.hpp"
#include "asbim/data/synthetic.hpp"
#include "asbim/eval/cross_validate.hpp"
#include "asbim/train/trainer.hpp"

using namespace asbim;

TEST(KeyValues, ParsesCommentsAndWhitespace) {
  auto kv = config::KeyValues::parse("# header\n epochs = 7  # inline\n\nvariant=plus_d\nlearning_rate=0.01\r\n");
  train::TrainConfig c;
  config::apply(kv, c);
  EXPECT_EQ(c.epochs, 7);
  EXPECT_EQ(c.variant, model::Variant::PlusInhibitoryControl);
  EXPECT_EQ(c.learning_rate, 0.01);
  EXPECT_EQ(c.q, 50);  // untouched default
  EXPECT_NO_THROW(kv.reject_unused());
}

TEST(KeyValues, RejectsMalformedAndUnknown) {
  EXPECT_THROW(config::KeyValues::parse("epochs 7\n"), ConfigError);
  EXPECT_THROW(config::KeyValues::parse("=7\n"), ConfigError);

  auto kv = config::KeyValues::parse("epochs=7\nepohcs=8\n");
  train::TrainConfig c;
  config::apply(kv, c);
  EXPECT_EQ(kv.unused(), std::vector<std::string>{"epohcs"});
  EXPECT_THROW(kv.reject_unused(), ConfigError);

  for (const char* bad : {"epochs=seven", "seed=-1", "variant=other", "learning_rate=fast"}) {
    auto b = config::KeyValues::parse(bad);
    EXPECT_THROW(config::apply(b, c), ConfigError) << bad;
  }
  EXPECT_THROW(config::KeyValues::load("/nonexistent/asbim.cfg"), ConfigError);
}

TEST(KeyValues, SharedFileFeedsSeveralStructs) {
  auto kv = config::KeyValues::parse("seed=9\nk=4\nn_dyads=12\nmax_len=15\n");
  train::TrainConfig t;
  eval::CvOptions cv;
  data::SyntheticConfig s;
  config::apply(kv, t);
  config::apply(kv, cv);
  config::apply(kv, s);
  EXPECT_NO_THROW(kv.reject_unused());
  EXPECT_EQ(t.seed, 9u);
  EXPECT_EQ(cv.seed, 9u);
  EXPECT_EQ(cv.k, 4);
  EXPECT_EQ(s.n_dyads, 12);
  EXPECT_EQ(t.max_len, 15);
  EXPECT_EQ(cv.max_len, 15);
}

TEST(Echo, RoundTripsEveryField) {
  train::TrainConfig c;
  c.epochs = 123;
  c.l2_coef = 0.125;
  c.variant = model::Variant::PlusInhibitoryControl;
  const auto text = config::echo(c);
  EXPECT_NE(text.find("epochs=123\n"), std::string::npos);
  EXPECT_NE(text.find("variant=plus_d\n"), std::string::npos);
  EXPECT_NE(text.find("seed=42\n"), std::string::npos);
  auto kv = config::KeyValues::parse(text);
  train::TrainConfig back;
  config::apply(kv, back);
  EXPECT_EQ(config::echo(back), text);

  data::SyntheticConfig s;
  s.outcome_coef_lag_cm = -1.5;
  auto skv = config::KeyValues::parse(config::echo(s));
  data::SyntheticConfig sback;
  config::apply(skv, sback);
  EXPECT_EQ(sback.outcome_coef_lag_cm, -1.5);
  EXPECT_EQ(config::echo(sback), config::echo(s));
}
