#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "l4sim/expcli/config.hpp"
#include "l4sim/expcli/matrix.hpp"
#include "l4sim/expcli/recommend.hpp"

using namespace l4sim;
using namespace l4sim::expcli;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("l4sim_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::vector<ResultRow> read_file(const std::filesystem::path& p) {
  std::ifstream is(p);
  return read_results(is);
}

ResultRow mean_row(const std::string& queue, double bdp, const std::string& opp, bool fallback, double share) {
  ResultRow r;
  r.scenario = queue + "_" + opp + (fallback ? "_fb" : "") + "_" + format_number(bdp);
  r.queue = queue;
  r.buffer_bdp = bdp;
  r.flow_a_cc = "prague";
  r.flow_a_ecn = "accecn";
  r.flow_a_fallback = fallback ? "on" : "off";
  r.flow_b_cc = opp;
  r.flow_b_ecn = "off";
  r.seed = "mean";
  r.throughput_a = 95.0 * share;
  r.throughput_b = 95.0 * (1.0 - share);
  r.share_a = share;
  return r;
}

const char* kSmallGrid = R"(
name: small
trials: 2
duration_s: 1
grid:
  queues: [fifo, dualpi2]
  buffers_bdp: [0.5, 2]
  opponents: [cubic, bbr2-accecn]
  prague_fallback: [off, on]
)";

}  // namespace

TEST(Csv, RoundTripIsExact) {
  ResultRow r;
  r.scenario = "fifo-ecn_b0p5_prague_vs_cubic-ecn";
  r.queue = "fifo-ecn";
  r.buffer_bdp = 0.5;
  r.flow_a_cc = "prague";
  r.flow_a_ecn = "accecn";
  r.flow_a_fallback = "off";
  r.flow_b_cc = "cubic";
  r.flow_b_ecn = "classic";
  r.seed = "mean";
  r.throughput_a = 1.0 / 3.0;
  r.throughput_b = 96.12345678901234;
  r.share_a = 0.1 + 0.2;
  r.qdelay_a_ms = 5e-324;
  r.qdelay_b_ms = 1e300;
  r.rtt_a_ms = 10.000000000000002;
  r.rtt_b_ms = 0.0;
  r.marks = 123456789.5;
  r.drops = 7;
  ResultRow s = r;
  s.seed = "17";
  s.share_a = 2.0 / 3.0;
  std::stringstream ss;
  write_header(ss);
  write_row(ss, r);
  write_row(ss, s);
  const auto back = read_results(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0], r);
  EXPECT_EQ(back[1], s);
}

TEST(Csv, RejectsBadInput) {
  EXPECT_THROW(format_number(std::nan("")), CsvError);
  std::stringstream bad_header("scenario,queue\n");
  EXPECT_THROW(read_results(bad_header), CsvError);
  std::stringstream bad_number;
  write_header(bad_number);
  bad_number << "a,fifo,x,prague,accecn,off,cubic,off,1,1,1,1,1,1,1,1,1,1\n";
  EXPECT_THROW(read_results(bad_number), CsvError);
}

TEST(Config, ParsesGridAndRuns) {
  const auto cfg = parse_matrix_config_text(R"(
name: demo
trials: 3
jobs: 2
seed_base: 100
network: {bottleneck_mbps: 50, base_rtt_ms: 20}
queue_params: {ecn_threshold_ms: 2}
grid:
  queues: [fifo-ecn]
  buffers_bdp: [1]
  opponents: [cubic-ecn]
runs:
  - id: solo
    queue: fifo-ecn
    buffer_bdp: 2
    base_rtt_ms: 25
    ecn_threshold_ms: 1
    flows: [reno-ecn]
)");
  EXPECT_EQ(cfg.name, "demo");
  EXPECT_EQ(cfg.trials, 3u);
  EXPECT_EQ(cfg.base.bottleneck_rate_bps, 50'000'000u);
  EXPECT_EQ(cfg.base.queue.ecn_threshold, SimTime::ms(2));
  const auto cells = expand_cells(cfg);
  ASSERT_EQ(cells.size(), 2u);
  EXPECT_EQ(cells[0].id, "fifo-ecn_b1_prague_vs_cubic-ecn");
  EXPECT_EQ(cells[0].scenario.seeds, (std::vector<std::uint64_t>{101, 102, 103}));
  EXPECT_EQ(cells[1].scenario.base_rtt, SimTime::ms(25));
  EXPECT_EQ(cells[1].scenario.queue.ecn_threshold, SimTime::ms(1));
  EXPECT_EQ(cells[1].scenario.flows.size(), 1u);
}

TEST(Config, UnknownNamesReportLocation) {
  try {
    parse_matrix_config_text("grid:\n  queues: [fifo, red]\n  buffers_bdp: [1]\n  opponents: [cubic]\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 1);
    EXPECT_EQ(e.column(), 17);
    EXPECT_NE(std::string(e.what()).find("unknown queue 'red'"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("line 2, column 18"), std::string::npos);
  }
  try {
    parse_matrix_config_text("runs:\n  - id: x\n    queue: fifo\n    flows: [cubic, vegas]\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 3);
    EXPECT_NE(std::string(e.what()).find("unknown flow 'vegas'"), std::string::npos);
  }
  EXPECT_THROW(parse_matrix_config_text("trails: 3\nruns: []\n"), ConfigError);
  EXPECT_THROW(parse_matrix_config_text("trials: 0\n"), ConfigError);
  EXPECT_THROW(parse_matrix_config_text("grid: [\n"), ConfigError);
  EXPECT_THROW(load_matrix_config("/nonexistent/config.yaml"), ConfigError);
}

TEST(Config, InvalidCombinationsAreConfigErrors) {
  EXPECT_THROW(parse_matrix_config_text("runs:\n  - id: x\n    queue: fifo\n    flows: [cubic, cubic, reno]\n"),
               ConfigError);
  EXPECT_THROW(parse_matrix_config_text("grid:\n  queues: [fifo]\n  buffers_bdp: [1]\n  opponents: [prague]\n"),
               ConfigError);
  EXPECT_THROW(parse_matrix_config_text("grid:\n  queues: [fifo]\n  buffers_bdp: [-1]\n  opponents: [cubic]\n"),
               ConfigError);
  EXPECT_THROW(expand_cells(parse_matrix_config_text("runs:\n  - id: x\n    queue: fifo\n    flows: [cubic]\n"
                                                     "    ecn_threshold_ms: 0\n")),
               ConfigError);
}

TEST(Config, ShippedConfigsLoad) {
  const std::filesystem::path dir = std::filesystem::path(L4SIM_SOURCE_DIR) / "tools" / "configs";
  for (const char* name : {"paper_replication.yaml", "fig1.yaml", "single_cell.yaml"})
    EXPECT_NO_THROW(expand_cells(load_matrix_config((dir / name).string()))) << name;
  const auto shipped = expand_cells(load_matrix_config((dir / "paper_replication.yaml").string()));
  const auto builtin = expand_cells(paper_replication_config());
  ASSERT_EQ(shipped.size(), builtin.size());
  for (std::size_t i = 0; i < shipped.size(); ++i) EXPECT_EQ(shipped[i].id, builtin[i].id);
}

TEST(Matrix, PaperGridShape) {
  const auto cfg = paper_replication_config();
  const auto cells = expand_cells(cfg);
  EXPECT_EQ(cells.size(), 6u * 5u * 6u * 2u);
  std::set<std::string> ids;
  for (const auto& c : cells) ids.insert(c.id);
  EXPECT_EQ(ids.size(), cells.size());
  EXPECT_EQ(cfg.trials, 10u);
  EXPECT_EQ(cells.front().scenario.seeds.size(), 10u);
}

TEST(Matrix, RowCountAndGridCompleteness) {
  auto cfg = parse_matrix_config_text(kSmallGrid);
  const auto dir = temp_dir("grid");
  const auto out = run_matrix(cfg, dir);
  EXPECT_EQ(out.failed_trials, 0u);
  EXPECT_EQ(out.cells, 16u);
  const auto rows = read_file(dir / "results.csv");
  EXPECT_EQ(rows.size(), out.cells * (cfg.trials + 2));
  EXPECT_EQ(rows, out.rows);
  std::map<std::string, std::pair<int, int>> agg;
  for (const auto& r : rows) {
    if (r.seed == "mean") ++agg[r.scenario].first;
    if (r.seed == "std") ++agg[r.scenario].second;
  }
  EXPECT_EQ(agg.size(), out.cells);
  for (const auto& [id, n] : agg) EXPECT_EQ(n, std::make_pair(1, 1)) << id;
}

TEST(Matrix, SingleCellGivesTwelveRows) {
  auto cfg = load_matrix_config((std::filesystem::path(L4SIM_SOURCE_DIR) / "tools/configs/single_cell.yaml").string());
  cfg.base.duration = SimTime::sec(1);
  const auto dir = temp_dir("single");
  const auto out = run_matrix(cfg, dir);
  EXPECT_EQ(read_file(dir / "results.csv").size(), 12u);
  EXPECT_EQ(out.rows.back().seed, "std");
  EXPECT_EQ(out.rows[10].seed, "mean");
}

TEST(Matrix, OutputIndependentOfWorkerCount) {
  auto cfg = parse_matrix_config_text(kSmallGrid);
  cfg.jobs = 1;
  const auto a = run_matrix(cfg, temp_dir("w1"));
  cfg.jobs = 4;
  const auto b = run_matrix(cfg, temp_dir("w4"));
  EXPECT_EQ(a.rows, b.rows);
  EXPECT_EQ(a.failed_trials + b.failed_trials, 0u);
}

TEST(Matrix, CsvBytesIndependentOfWorkerCount) {
  auto cfg = parse_matrix_config_text(kSmallGrid);
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream is(p);
    return std::string(std::istreambuf_iterator<char>(is), {});
  };
  cfg.jobs = 1;
  const auto d1 = temp_dir("bytes1");
  run_matrix(cfg, d1);
  cfg.jobs = 3;
  const auto d3 = temp_dir("bytes3");
  run_matrix(cfg, d3);
  EXPECT_EQ(slurp(d1 / "results.csv"), slurp(d3 / "results.csv"));
}

TEST(Matrix, TimeseriesFilesPerRun) {
  auto cfg = load_matrix_config((std::filesystem::path(L4SIM_SOURCE_DIR) / "tools/configs/fig1.yaml").string());
  cfg.base.duration = SimTime::sec(3);
  const auto dir = temp_dir("fig1");
  run_matrix(cfg, dir);
  for (const char* id : {"reno_thresh1ms", "reno_thresh25ms", "prague_thresh1ms"}) {
    std::ifstream is(dir / "timeseries" / (std::string(id) + "_seed1_flow0.csv"));
    ASSERT_TRUE(is) << id;
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "t_s,throughput_mbps,srtt_ms,qdelay_ms");
    int n = 0;
    while (std::getline(is, line)) ++n;
    EXPECT_EQ(n, 30) << id;
  }
}

TEST(Recommend, FqRowIsOk) {
  std::vector<ResultRow> rows;
  for (const char* q : {"fq", "fq-codel"})
    for (double b : {0.5, 1.0, 2.0, 4.0, 8.0})
      for (const char* opp : {"cubic", "bbr2"})
        for (bool fb : {false, true}) rows.push_back(mean_row(q, b, opp, fb, 0.5));
  const auto rec = recommend(rows);
  for (auto o : kOpponents)
    for (bool fb : {false, true}) EXPECT_EQ(rec.at(BufferType::FqEcn, o, fb).verdict, Verdict::Ok);
  EXPECT_EQ(rec.at(BufferType::DualPi2, Opponent::Cubic, false).verdict, Verdict::InsufficientData);
}

TEST(Recommend, DominanceAndStarvationAreNotOk) {
  std::vector<ResultRow> rows;
  for (double b : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    rows.push_back(mean_row("fifo-ecn", b, "cubic", false, b < 1 ? 0.5 : 0.93));
    rows.push_back(mean_row("dualpi2", b, "cubic", true, 0.12));
    rows.push_back(mean_row("dualpi2", b, "cubic", false, 0.42));
  }
  const auto rec = recommend(rows, 0.35);
  const auto& sq = rec.at(BufferType::SqEcn, Opponent::Cubic, false);
  EXPECT_EQ(sq.verdict, Verdict::NotOk);
  EXPECT_EQ(sq.cells_considered, 5u);
  EXPECT_EQ(sq.violations.size(), 4u);
  EXPECT_EQ(sq.violations.front().buffer_bdp, 1.0);
  EXPECT_NEAR(sq.min_share, 0.07, 1e-12);
  EXPECT_EQ(rec.at(BufferType::DualPi2, Opponent::Cubic, true).verdict, Verdict::NotOk);
  EXPECT_EQ(rec.at(BufferType::DualPi2, Opponent::Cubic, false).verdict, Verdict::Ok);

  std::ostringstream os;
  print_recommendation(os, rec);
  EXPECT_NE(os.str().find("0.35"), std::string::npos);
  EXPECT_NE(os.str().find("buffer 8 BDP, Prague share 0.930"), std::string::npos);
}

TEST(Recommend, IgnoresTrialRowsAndIsPure) {
  std::vector<ResultRow> rows = {mean_row("fifo", 1, "bbr2", false, 0.45)};
  ResultRow trial = mean_row("fifo", 1, "bbr2", false, 0.01);
  trial.seed = "3";
  rows.push_back(trial);
  const auto a = recommend(rows);
  const auto b = recommend(rows);
  EXPECT_EQ(a.at(BufferType::SqNoEcn, Opponent::BbrV2, false).verdict, Verdict::Ok);
  std::ostringstream oa, ob;
  print_recommendation(oa, a);
  print_recommendation(ob, b);
  EXPECT_EQ(oa.str(), ob.str());
  EXPECT_THROW(recommend(rows, 0.6), std::invalid_argument);
}
