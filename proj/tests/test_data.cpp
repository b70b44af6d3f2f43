#include <cmath>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "asbim/data/csv_io.hpp"
#include "asbim/data/descriptives.hpp"
#include "asbim/data/imputation.hpp"
#include "asbim/data/preprocess.hpp"
#include "asbim/data/synthetic.hpp"

using namespace asbim;
using namespace asbim::data;

namespace {

const char* kToySequences =
    "dyad_id,t,maut,cdef\n"
    "A,1,1,0\n"
    "A,2,2,1.5\n"
    "A,3,,0\n"
    "B,1,0.5,\n"
    "B,2,0,3\n"
    "B,3,3,0\n";

const char* kToyDyads =
    "dyad_id,gender,ext_t1,ext_t2,inhibitory_control\n"
    "A,0,0.5,0.75,4\n"
    "B,1,1.25,,\n";

RawDyadObservation raw_dyad(std::string id, OptSeq mother, OptSeq child, double t1, std::optional<double> t2) {
  RawDyadObservation d;
  d.dyad_id = std::move(id);
  d.maternal_autonomy_support = std::move(mother);
  d.child_defeat_raw = std::move(child);
  d.externalizing_t1 = t1;
  d.externalizing_t2 = t2;
  return d;
}

}  // namespace

TEST(Csv, ParsesToyFile) {
  const auto ds = parse_dataset(kToySequences, kToyDyads);
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds[0].dyad_id, "A");
  EXPECT_EQ(ds[0].length(), 3u);
  EXPECT_EQ(ds[1].length(), 3u);
  EXPECT_FALSE(ds[0].maternal_autonomy_support[2].has_value());
  EXPECT_FALSE(ds[1].child_defeat_raw[0].has_value());
  EXPECT_EQ(*ds[0].child_defeat_raw[1], 1.5);
  EXPECT_EQ(ds[1].gender, Gender::Girl);
  EXPECT_FALSE(ds[1].externalizing_t2.has_value());
  EXPECT_FALSE(ds[1].inhibitory_control.has_value());
  EXPECT_EQ(*ds[0].inhibitory_control, 4.0);
}

TEST(Csv, OutOfRangeRatingNamesTheRow) {
  std::string seq = kToySequences;
  seq.replace(seq.find("A,2,2,1.5"), 9, "A,2,3.5,1");
  try {
    parse_dataset(seq, kToyDyads);
    FAIL() << "expected an ingestion error";
  } catch (const IngestionError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Csv, RejectsMalformedInput) {
  EXPECT_THROW(parse_dataset("dyad_id,t,maut,cdef\nA,1,1\n", kToyDyads), IngestionError);
  EXPECT_THROW(parse_dataset("dyad_id,t,maut,cdef\nA,1,x,0\n", kToyDyads), IngestionError);
  EXPECT_THROW(parse_dataset("dyad_id,t,maut,cdef\nA,1,1,0\nA,3,1,0\nB,1,1,0\n", kToyDyads), IngestionError);
  EXPECT_THROW(parse_dataset("dyad_id,t,maut,cdef\nA,1,1,0\nA,1,1,0\nB,1,1,0\n", kToyDyads), IngestionError);
  EXPECT_THROW(parse_dataset(std::string(kToySequences) + "C,1,1,0\n", kToyDyads), IngestionError);
  EXPECT_THROW(parse_dataset("dyad_id,t,maut,cdef\nA,1,1,0\n", kToyDyads), IngestionError);  // B has no rows
  EXPECT_THROW(parse_dataset(kToySequences, "dyad_id,gender,ext_t1,ext_t2,inhibitory_control\nA,2,1,,\n"),
               IngestionError);
  EXPECT_THROW(parse_dataset(kToySequences, "dyad_id,gender,ext_t1,ext_t2,inhibitory_control\nA,0,2.5,,\n"),
               IngestionError);
  EXPECT_THROW(parse_dataset(kToySequences, "dyad_id,gender,ext_t2,inhibitory_control\nA,0,1,4\n"), IngestionError);
  // inhibitory_control is the only optional column
  const auto no_ic = parse_dataset(kToySequences, "dyad_id,gender,ext_t1,ext_t2\nA,0,1,1\nB,1,0.5,\n");
  EXPECT_FALSE(no_ic[0].inhibitory_control.has_value());
  EXPECT_THROW(parse_dataset("", kToyDyads), IngestionError);
}

TEST(Csv, RoundTripIsCellIdentical) {
  const auto ds = parse_dataset(kToySequences, kToyDyads);
  EXPECT_EQ(format_sequences_csv(ds), kToySequences);
  EXPECT_EQ(format_dyads_csv(ds), kToyDyads);
}

TEST(Csv, SyntheticRoundTripThroughFiles) {
  SyntheticConfig cfg;
  cfg.n_dyads = 12;
  cfg.missing_t2_rate = 0.3;
  cfg.missing_interval_rate = 0.1;
  const auto ds = generate_synthetic(cfg);
  const auto dir = std::filesystem::temp_directory_path() / "asbim_csv_roundtrip";
  std::filesystem::create_directories(dir);
  const DatasetPaths paths{(dir / "s.csv").string(), (dir / "d.csv").string()};
  write_dataset(ds, paths);
  const auto back = load_dataset(paths);
  EXPECT_EQ(format_sequences_csv(back), io::read_file(paths.sequences));
  EXPECT_EQ(format_dyads_csv(back), io::read_file(paths.dyads));
  ASSERT_EQ(back.size(), ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    EXPECT_EQ(back[i].maternal_autonomy_support, ds[i].maternal_autonomy_support);
    EXPECT_EQ(back[i].externalizing_t2, ds[i].externalizing_t2);
  }
}

TEST(Csv, MissingFileIsIngestionError) {
  EXPECT_THROW(load_dataset({"/nonexistent/a.csv", "/nonexistent/b.csv"}), IngestionError);
}

TEST(Binarize, Definition) {
  EXPECT_EQ(binarize_defeat(0.0), 0.0);
  EXPECT_EQ(binarize_defeat(0.5), 1.0);
  EXPECT_EQ(binarize_defeat(3.0), 1.0);
  EXPECT_FALSE(binarize_defeat(std::nullopt).has_value());
  EXPECT_THROW(binarize_defeat(-0.5), IngestionError);
}

TEST(PersonMean, Examples) {
  EXPECT_EQ(person_mean(OptSeq{1.0, 1.0, 1.0}), 1.0);
  EXPECT_EQ(person_mean(OptSeq{0.0, std::nullopt, 2.0}), 1.0);
  EXPECT_THROW(person_mean(OptSeq{std::nullopt, std::nullopt}), DegenerateInputError);
}

TEST(PersonMean, MatchesSummation) {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  std::bernoulli_distribution missing(0.2);
  OptSeq seq;
  long double sum = 0;
  int n = 0;
  for (int i = 0; i < 37; ++i) {
    if (i > 0 && missing(gen)) {
      seq.push_back(std::nullopt);
    } else {
      const double v = u(gen);
      seq.push_back(v);
      sum += v;
      ++n;
    }
  }
  EXPECT_NEAR(person_mean(seq), static_cast<double>(sum / n), 1e-14);
}

TEST(PadOrTruncate, Examples) {
  std::vector<double> twenty(20, 0.5);
  auto p = pad_or_truncate(twenty, 20);
  EXPECT_EQ(p.values, twenty);
  EXPECT_EQ(p.mask, numcore::Mask(20, true));

  p = pad_or_truncate({1, 2, 3}, 20);
  ASSERT_EQ(p.values.size(), 20u);
  for (std::size_t i = 3; i < 20; ++i) {
    EXPECT_EQ(p.values[i], 0.0);
    EXPECT_FALSE(p.mask[i]);
  }
  EXPECT_EQ(p.values[2], 3.0);

  std::vector<double> long_seq(25);
  for (std::size_t i = 0; i < 25; ++i) long_seq[i] = static_cast<double>(i);
  p = pad_or_truncate(long_seq, 20);
  EXPECT_EQ(p.values, std::vector<double>(long_seq.begin(), long_seq.begin() + 20));
  EXPECT_EQ(p.mask, numcore::Mask(20, true));

  EXPECT_THROW(pad_or_truncate({1.0}, 0), ConfigError);
}

TEST(ImputeIntervals, Examples) {
  auto d = raw_dyad("X", {1.0, std::nullopt, 3.0}, {1.0, std::nullopt, 0.0}, 1, 1);
  const auto out = impute_intervals(d);
  EXPECT_EQ(out.maternal_autonomy_support, (OptSeq{1.0, 2.0, 3.0}));
  EXPECT_EQ(out.child_defeat_raw, (OptSeq{1.0, 0.0, 0.0}));

  auto full = raw_dyad("Y", {0.5, 1.5}, {0.0, 1.0}, 1, 1);
  EXPECT_EQ(impute_intervals(full).maternal_autonomy_support, full.maternal_autonomy_support);
  EXPECT_EQ(impute_intervals(full).child_defeat_raw, full.child_defeat_raw);

  EXPECT_THROW(impute_intervals(raw_dyad("Z", {std::nullopt}, {0.0}, 1, 1)), DegenerateInputError);
  EXPECT_THROW(impute_intervals(raw_dyad("Z", {1.0}, {std::nullopt}, 1, 1)), DegenerateInputError);
}

TEST(Preprocess, InvariantsAndMeans) {
  OptSeq mother, child;
  for (int i = 0; i < 25; ++i) {
    mother.push_back(i == 3 ? std::nullopt : std::optional<double>(0.1 * i));
    child.push_back(i % 4 == 0 ? 2.0 : 0.0);
  }
  const auto raw = raw_dyad("P", mother, child, 0.5, 0.6);
  const auto d = preprocess(raw, 20);
  EXPECT_NO_THROW(check_invariants(d));
  EXPECT_EQ(d.n_observed, 20u);
  // means over the observed part of the first 20 intervals
  double s = 0;
  for (int i = 0; i < 20; ++i)
    if (i != 3) s += 0.1 * i;
  EXPECT_NEAR(d.mother_mean, s / 19.0, 1e-15);
  EXPECT_EQ(d.child_mean, 5.0 / 20.0);
  EXPECT_EQ(d.mother_seq[3], d.mother_mean);

  const auto short_d = preprocess(raw_dyad("Q", {1.0, 2.0, 0.0}, {0.0, 1.0, 0.0}, 1, 1), 20);
  EXPECT_EQ(short_d.n_observed, 3u);
  EXPECT_EQ(short_d.mask, numcore::leading_mask(3, 20));
  // means of the unpadded data equal the means of the masked padded data
  double masked_sum = 0;
  for (std::size_t i = 0; i < 20; ++i)
    if (short_d.mask[i]) masked_sum += short_d.mother_seq[i];
  EXPECT_EQ(short_d.mother_mean, masked_sum / 3.0);
}

TEST(Preprocess, RejectsInvalidRaw) {
  EXPECT_THROW(preprocess(raw_dyad("E", {}, {}, 1, 1)), IngestionError);
  EXPECT_THROW(preprocess(raw_dyad("E", {1.0}, {0.0, 0.0}, 1, 1)), IngestionError);
  EXPECT_THROW(preprocess(raw_dyad("E", {4.0}, {0.0}, 1, 1)), IngestionError);
  EXPECT_THROW(preprocess(raw_dyad("E", {1.0}, {0.0}, 2.5, 1)), IngestionError);
}

TEST(ImputeOutcomes, NothingMissingGivesIdenticalCopies) {
  SyntheticConfig cfg;
  cfg.n_dyads = 20;
  const auto ds = generate_synthetic(cfg);
  const auto out = impute_outcomes(ds, {4, 20, 1.0}, 3);
  ASSERT_EQ(out.size(), 4u);
  for (const auto& copy : out) {
    EXPECT_EQ(format_dyads_csv(copy), format_dyads_csv(ds));
    EXPECT_EQ(format_sequences_csv(copy), format_sequences_csv(ds));
  }
}

TEST(ImputeOutcomes, ZeroNoiseMatchesNormalEquations) {
  SyntheticConfig cfg;
  cfg.n_dyads = 60;
  cfg.missing_t2_rate = 0.2;
  const auto ds = generate_synthetic(cfg);
  const auto out = impute_outcomes(ds, {2, 20, 0.0}, 5);

  // Independent fit: accumulate X'X and X'y by hand and solve.
  Eigen::Matrix<double, 5, 5> xtx = Eigen::Matrix<double, 5, 5>::Zero();
  Eigen::Matrix<double, 5, 1> xty = Eigen::Matrix<double, 5, 1>::Zero();
  const auto row = [](const RawDyadObservation& d) {
    double mm = 0, cm = 0;
    int nm = 0, nc = 0;
    for (std::size_t t = 0; t < d.length() && t < 20; ++t) {
      if (d.maternal_autonomy_support[t]) mm += *d.maternal_autonomy_support[t], ++nm;
      if (d.child_defeat_raw[t]) cm += (*d.child_defeat_raw[t] > 0 ? 1.0 : 0.0), ++nc;
    }
    Eigen::Matrix<double, 5, 1> x;
    x << 1.0, d.externalizing_t1, d.gender == Gender::Girl ? 1.0 : 0.0, mm / nm, cm / nc;
    return x;
  };
  int missing = 0;
  for (const auto& d : ds) {
    if (!d.externalizing_t2) {
      ++missing;
      continue;
    }
    const auto x = row(d);
    xtx += x * x.transpose();
    xty += x * *d.externalizing_t2;
  }
  ASSERT_GT(missing, 0);
  const Eigen::Matrix<double, 5, 1> beta = xtx.ldlt().solve(xty);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds[i].externalizing_t2) continue;
    const double expected = std::clamp(row(ds[i]).dot(beta), 0.0, 2.0);
    EXPECT_NEAR(*out[0][i].externalizing_t2, expected, 1e-10);
    EXPECT_EQ(*out[0][i].externalizing_t2, *out[1][i].externalizing_t2);
  }
}

TEST(ImputeOutcomes, ObservedValuesBitIdenticalAndDrawsIndependent) {
  SyntheticConfig cfg;
  cfg.n_dyads = 101;
  cfg.missing_t2_rate = 0.05;
  cfg.rng_seed = 4;
  const auto ds = generate_synthetic(cfg);
  const auto out = impute_outcomes(ds, {10, 20, 1.0}, 99);
  ASSERT_EQ(out.size(), 10u);
  std::size_t differing = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (const auto& imp : out) {
      ASSERT_TRUE(imp[i].externalizing_t2.has_value());
      EXPECT_GE(*imp[i].externalizing_t2, 0.0);
      EXPECT_LE(*imp[i].externalizing_t2, 2.0);
      if (ds[i].externalizing_t2) {
        EXPECT_EQ(*imp[i].externalizing_t2, *ds[i].externalizing_t2);
      }
      EXPECT_EQ(imp[i].maternal_autonomy_support, ds[i].maternal_autonomy_support);
    }
    if (!ds[i].externalizing_t2 && *out[0][i].externalizing_t2 != *out[1][i].externalizing_t2) ++differing;
  }
  EXPECT_GT(differing, 0u);
  // deterministic under seed
  EXPECT_EQ(format_dyads_csv(impute_outcomes(ds, {10, 20, 1.0}, 99)[7]), format_dyads_csv(out[7]));
}

TEST(ImputeOutcomes, TooFewCompleteCases) {
  RawDataset ds;
  for (int i = 0; i < 8; ++i) {
    ds.push_back(raw_dyad("D" + std::to_string(i), {0.1 * i, 1.0}, {0.0, 1.0}, 0.1 * i,
                          i < 3 ? std::optional<double>(0.5) : std::nullopt));
  }
  EXPECT_THROW(impute_outcomes(ds, {2, 20, 1.0}, 1), ImputationError);
  EXPECT_THROW(impute_outcomes(ds, {0, 20, 1.0}, 1), ConfigError);
}

TEST(Synthetic, DegenerateProcessGivesConstantMother) {
  SyntheticConfig cfg;
  cfg.n_dyads = 10;
  cfg.lag_mother_to_child = cfg.lag_child_to_mother = cfg.lag_cm_spread = 0.0;
  cfg.ar_mother = cfg.ar_child = 0.0;
  cfg.mother_noise_sd = 0.0;
  for (const auto& d : generate_synthetic(cfg)) {
    for (const auto& m : d.maternal_autonomy_support) EXPECT_EQ(*m, *d.maternal_autonomy_support.front());
  }
}

TEST(Synthetic, NoLagNoNoiseOutcomeIsAffineInT1) {
  SyntheticConfig cfg;
  cfg.n_dyads = 50;
  cfg.outcome_coef_lag_cm = 0.0;
  cfg.outcome_noise_sd = 0.0;
  for (const auto& d : generate_synthetic(cfg)) {
    const double expected = std::clamp(cfg.outcome_intercept + cfg.outcome_coef_t1 * d.externalizing_t1, 0.0, 2.0);
    EXPECT_NEAR(*d.externalizing_t2, expected, 1e-15);
  }
}

TEST(Synthetic, ReproducibleAndPrefixStable) {
  SyntheticConfig cfg;
  cfg.n_dyads = 30;
  cfg.missing_interval_rate = 0.05;
  const auto a = generate_synthetic(cfg);
  const auto b = generate_synthetic(cfg);
  EXPECT_EQ(format_sequences_csv(a), format_sequences_csv(b));
  EXPECT_EQ(format_dyads_csv(a), format_dyads_csv(b));
  cfg.n_dyads = 10;
  const auto prefix = generate_synthetic(cfg);
  EXPECT_EQ(format_dyads_csv(prefix), format_dyads_csv(RawDataset(a.begin(), a.begin() + 10)));
  cfg.rng_seed = 2;
  EXPECT_NE(format_dyads_csv(generate_synthetic(cfg)), format_dyads_csv(prefix));
}

TEST(Synthetic, RecordsAreValid) {
  SyntheticConfig cfg;
  cfg.missing_interval_rate = 0.2;
  cfg.missing_t2_rate = 0.1;
  const auto ds = generate_synthetic(cfg);
  ASSERT_EQ(ds.size(), 101u);
  for (const auto& d : ds) {
    EXPECT_NO_THROW(validate(d));
    EXPECT_NO_THROW(preprocess(d));
    EXPECT_EQ(d.length(), 20u);
  }
  cfg.n_dyads = 0;
  EXPECT_TRUE(generate_synthetic(cfg).empty());
}

TEST(Synthetic, InvalidConfig) {
  SyntheticConfig cfg;
  cfg.ar_mother = 1.0;
  EXPECT_THROW(generate_synthetic(cfg), ConfigError);
  cfg = {};
  cfg.defeat_base_rate = 0.0;
  EXPECT_THROW(generate_synthetic(cfg), ConfigError);
  cfg = {};
  cfg.seq_len = 0;
  EXPECT_THROW(generate_synthetic(cfg), ConfigError);
}

TEST(Synthetic, PerDyadLagRecoveryTracksOutcome) {
  SyntheticConfig cfg;
  cfg.n_dyads = 5000;
  cfg.outcome_coef_lag_cm = -0.44;
  const auto truth = generate_synthetic_with_truth(cfg);

  // Per dyad: OLS of centered m_t on (c_{t-1}, m_{t-1}) via 2x2 normal equations.
  std::vector<double> est, t2, true_lag;
  for (std::size_t j = 0; j < truth.dyads.size(); ++j) {
    const auto& d = truth.dyads[j];
    double mm = 0, cm = 0;
    const auto n = d.length();
    for (std::size_t t = 0; t < n; ++t) mm += *d.maternal_autonomy_support[t], cm += *d.child_defeat_raw[t];
    mm /= static_cast<double>(n);
    cm /= static_cast<double>(n);
    double scc = 0, scm = 0, smm = 0, sc_y = 0, sm_y = 0;
    for (std::size_t t = 1; t < n; ++t) {
      const double c = *d.child_defeat_raw[t - 1] - cm, m = *d.maternal_autonomy_support[t - 1] - mm;
      const double y = *d.maternal_autonomy_support[t] - mm;
      scc += c * c, scm += c * m, smm += m * m, sc_y += c * y, sm_y += m * y;
    }
    const double det = scc * smm - scm * scm;
    if (std::abs(det) < 1e-12) continue;
    est.push_back((smm * sc_y - scm * sm_y) / det);
    t2.push_back(*d.externalizing_t2);
    true_lag.push_back(truth.child_to_mother_lag[j]);
  }
  ASSERT_GT(est.size(), 4000u);
  const auto corr = [](const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<std::optional<double>> a(x.begin(), x.end()), b(y.begin(), y.end());
    return *pairwise_correlation(a, b);
  };
  EXPECT_LT(corr(est, t2), 0.0);
  EXPECT_GT(corr(est, true_lag), 0.0);
}

TEST(Descriptives, HandComputedTwoDyads) {
  RawDataset ds{raw_dyad("A", {1.0, 2.0}, {0.0, 2.0}, 0.5, 1.0), raw_dyad("B", {0.0, 1.0}, {0.0, 0.0}, 1.5, 0.0)};
  ds[0].inhibitory_control = 3.0;
  const auto d = descriptives(ds);
  ASSERT_EQ(d.variables.size(), 5u);
  // maut means 1.5 and 0.5
  EXPECT_EQ(d.variables[0].mean, 1.0);
  EXPECT_NEAR(d.variables[0].sd, std::sqrt(0.5), 1e-15);
  EXPECT_EQ(d.variables[0].min, 0.5);
  EXPECT_EQ(d.variables[0].max, 1.5);
  // cdef (binarized) means 0.5 and 0
  EXPECT_EQ(d.variables[1].mean, 0.25);
  EXPECT_EQ(d.variables[2].mean, 1.0);
  EXPECT_EQ(d.variables[4].n, 1u);
  EXPECT_EQ(d.variables[4].sd, 0.0);
  // two points are perfectly (anti)correlated
  EXPECT_NEAR(*d.correlation[0][1], 1.0, 1e-12);
  EXPECT_NEAR(*d.correlation[0][2], -1.0, 1e-12);
  EXPECT_NEAR(*d.correlation[2][3], -1.0, 1e-12);
  EXPECT_FALSE(d.correlation[0][4].has_value());
}

TEST(Descriptives, ConstantVariableHasNoCorrelation) {
  RawDataset ds;
  for (int i = 0; i < 5; ++i) ds.push_back(raw_dyad("C" + std::to_string(i), {1.0, 0.1 * i}, {0.0}, 0.7, 0.1 * i));
  for (auto& d : ds) d.child_defeat_raw = {0.0, 0.0};
  const auto d = descriptives(ds);
  EXPECT_EQ(d.variables[2].sd, 0.0);
  for (std::size_t j = 0; j < 5; ++j) EXPECT_FALSE(d.correlation[2][j].has_value());
  EXPECT_TRUE(d.correlation[0][3].has_value());
  EXPECT_THROW(descriptives({}), DegenerateInputError);
}
