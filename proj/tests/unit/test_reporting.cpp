#include "doctest.h"
#include "oracles.hpp"
#include "temp_dir.hpp"

#include "ucahar/io.hpp"
#include "ucahar/reporting.hpp"

using namespace ucahar;

namespace {

MetricsReport random_report(HeadKind head, Index labels, std::mt19937_64& rng) {
  const BinaryMatrix pred = oracle::random_binary(30, labels, 0.4, rng).cast<int>();
  const BinaryMatrix truth = oracle::random_binary(30, labels, 0.4, rng).cast<int>();
  std::vector<std::string> names;
  for (Index c = 0; c < labels; ++c) names.push_back("label_" + std::to_string(c));
  return make_report(head, names, pred, truth);
}

TrainHistory fake_history(Index epochs, double alpha) {
  TrainHistory h;
  for (Index e = 0; e < epochs; ++e) {
    EpochRecord r;
    r.epoch = e;
    const double x = 1.0 / static_cast<double>(e + 1);
    r.train_loss = {x, 0.5 * x, 0.25 * x, 0.7 + 0.01 * static_cast<double>(e), 0.0};
    r.train_loss.total = r.train_loss.activity + r.train_loss.context + r.train_loss.user +
                         alpha * r.train_loss.contrastive;
    h.epochs.push_back(r);
    h.steps.push_back({e, e, r.train_loss});
  }
  h.best_epoch = epochs - 1;
  return h;
}

}  // namespace

TEST_CASE("table cells use the MCC/Macro-F1 format") {
  CHECK(format_cell(0.5921, 0.76249) == "0.592/0.762");
  const auto cell = parse_cell("0.592/0.762");
  CHECK(cell.mcc == 0.592);
  CHECK(cell.f1 == 0.762);
  const auto bare = parse_cell(".975/.987");
  CHECK(bare.mcc == 0.975);
  CHECK(bare.f1 == 0.987);
  CHECK(parse_cell("-0.125/0.000").mcc == -0.125);
  CHECK_THROWS_AS(parse_cell("0.5"), IoError);
}

TEST_CASE("ablation table has one row per variant and parses back") {
  std::mt19937_64 rng(1);
  std::vector<AblationRow> rows;
  for (auto v : {Ablation::None, Ablation::NoUserId, Ablation::NoContrastive, Ablation::NoSequence}) {
    AblationRow row;
    row.variant = v;
    row.test = {random_report(HeadKind::Activity, 4, rng), random_report(HeadKind::Context, 2, rng),
                random_report(HeadKind::User, 3, rng)};
    rows.push_back(row);
  }
  const auto text = render_ablation_table(rows);
  const auto parsed = parse_ablation_table(text);
  REQUIRE(parsed.size() == 4);
  for (size_t i = 0; i < 4; ++i) {
    CHECK(parsed[i].variant == to_string(rows[i].variant));
    for (size_t h = 0; h < 3; ++h) {
      CHECK(std::abs(parsed[i].heads[h].mcc - rows[i].test[h].macro_mcc) <= 5e-4 + 1e-12);
      CHECK(std::abs(parsed[i].heads[h].f1 - rows[i].test[h].macro_f1) <= 5e-4 + 1e-12);
      CHECK(format_cell(parsed[i].heads[h].mcc, parsed[i].heads[h].f1) ==
            format_cell(rows[i].test[h].macro_mcc, rows[i].test[h].macro_f1));
    }
  }
  CHECK_THROWS_AS(render_ablation_table({}), InvalidInput);
}

TEST_CASE("metrics reports round-trip at full precision") {
  TempDir dir("report_metrics");
  std::mt19937_64 rng(2);
  const std::array<MetricsReport, 3> reports = {random_report(HeadKind::Activity, 4, rng),
                                                random_report(HeadKind::Context, 2, rng),
                                                random_report(HeadKind::User, 3, rng)};
  write_metrics_csv(dir / "m.csv", reports);
  const auto back = read_metrics_csv(dir / "m.csv");
  REQUIRE(back.size() == 3);
  for (size_t h = 0; h < 3; ++h) {
    CHECK(back[h].head == reports[h].head);
    CHECK(back[h].macro_mcc == doctest::Approx(reports[h].macro_mcc).epsilon(1e-15));
    REQUIRE(back[h].per_label.size() == reports[h].per_label.size());
    for (size_t l = 0; l < back[h].per_label.size(); ++l) {
      CHECK(back[h].per_label[l].mcc == reports[h].per_label[l].mcc);
      CHECK(back[h].per_label[l].f1 == reports[h].per_label[l].f1);
      CHECK(back[h].per_label[l].counts == reports[h].per_label[l].counts);
      CHECK(back[h].per_label[l].label == reports[h].per_label[l].label);
    }
  }
  const auto table = render_metrics_table(reports);
  CHECK(table.find("label_3") != std::string::npos);
  CHECK(table.find("macro") != std::string::npos);
}

TEST_CASE("loss curves: one row per epoch, exact re-ingestion, L_d drawn when alpha is 0") {
  TempDir dir("report_curves");
  const auto history = fake_history(10, 0.0);
  const auto [csv, svg] = render_loss_curves(history, dir / "curves");
  const auto back = read_loss_curves(csv);
  const auto direct = loss_curves(history);
  REQUIRE(back.epochs.size() == 10);
  for (size_t k = 0; k < 5; ++k) {
    REQUIRE(back.series[k].size() == 10);
    CHECK(back.series[k] == direct.series[k]);
  }
  for (size_t e = 0; e < 10; ++e) {
    CHECK(back.series[3][e] > 0.0);
    CHECK(back.series[4][e] == doctest::Approx(back.series[0][e] + back.series[1][e] + back.series[2][e]));
  }
  const auto plot = read_text(svg);
  CHECK(plot.find(">L_d<") != std::string::npos);
  CHECK(std::count(plot.begin(), plot.end(), '\n') > 5);
  CHECK_THROWS_AS(render_loss_curves(TrainHistory{}, dir / "empty"), InvalidInput);
}

TEST_CASE("step history round-trips") {
  TempDir dir("report_steps");
  const auto history = fake_history(4, 0.5);
  write_step_history(dir / "h.csv", history.steps);
  const auto back = read_step_history(dir / "h.csv");
  REQUIRE(back.size() == 4);
  CHECK(back[2].step == 2);
  CHECK(back[3].loss.total == history.steps[3].loss.total);
  CHECK(read_text(dir / "h.csv").rfind("step,L_A,L_PP,L_U,L_d,L_total\n", 0) == 0);
}

TEST_CASE("run artifacts verify only when every file exists and parses") {
  TempDir dir("report_artifact");
  std::mt19937_64 rng(3);
  RunArtifact a;
  a.run_id = "r1";
  a.config_snapshot = dir / "config.json";
  a.history = dir / "history.csv";
  a.checkpoint = dir / "ckpt.json";
  a.reports = {dir / "m.csv"};
  write_text(a.config_snapshot, "{\"seed\": 1}");
  write_step_history(a.history, fake_history(2, 0.5).steps);
  const std::array<MetricsReport, 1> one = {random_report(HeadKind::User, 2, rng)};
  write_metrics_csv(a.reports[0], one);
  ModelConfig mc;
  mc.feature_dim = 2;
  mc.num_activities = mc.num_contexts = mc.num_users = 2;
  mc.use_sequence_encoder = false;
  write_checkpoint(a.checkpoint, ModelParams<double>::initialized(mc));
  CHECK_NOTHROW(a.verify());

  write_text(a.config_snapshot, "{broken");
  CHECK_THROWS_AS(a.verify(), IoError);
  write_text(a.config_snapshot, "{}");
  std::filesystem::remove(a.reports[0]);
  CHECK_THROWS_AS(a.verify(), IoError);
}
