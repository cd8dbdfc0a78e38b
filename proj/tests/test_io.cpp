#include <doctest.h>

#include <random>
#include <sstream>

#include "graphcp/error.hpp"
#include "graphcp/io.hpp"

using namespace graphcp;

namespace {

SeriesPanel read_panel(const std::string& text) {
  std::istringstream in(text);
  return read_panel_csv(in);
}

AuthIngest ingest(const std::string& text, std::size_t max_pair = 5000,
                  std::size_t max_users = 300) {
  std::istringstream in(text);
  return ingest_auth_events(in, max_pair, max_users);
}

}  // namespace

TEST_CASE("number formatting round-trips") {
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(3.0) == "3");
  CHECK(format_number(-90.0) == "-90");
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int n = 0; n < 1000; ++n) {
    const double x = u(gen);
    CHECK(std::stod(format_number(x)) == x);
  }
}

TEST_CASE("count panel read and round trip") {
  const auto p = read_panel("series_id,t,value\n1,1,4\n1,2,5\n2,1,0\n2,2,7\n");
  CHECK(p.series_count() == 2);
  CHECK(p.length() == 2);
  CHECK(p.count(1, 2) == 7);
  std::ostringstream out;
  write_panel_csv(p, out);
  CHECK(out.str() == "series_id,t,value\n1,1,4\n1,2,5\n2,1,0\n2,2,7\n");
  CHECK(read_panel(out.str()) == p);
}

TEST_CASE("multinomial panel round trip") {
  const auto p = SeriesPanel::multinomial({{{1, 0}, {2, 3}}, {{0, 0}, {5, 1}}});
  std::ostringstream out;
  write_panel_csv(p, out);
  CHECK(out.str().rfind("series_id,t,category,value\n1,1,1,1\n1,1,2,0\n", 0) == 0);
  CHECK(read_panel(out.str()) == p);
}

TEST_CASE("panel rows may come in any order") {
  const auto p = read_panel("series_id,t,value\n2,2,7\n1,2,5\n2,1,0\n1,1,4\n");
  CHECK(p.count(0, 1) == 4);
  CHECK(p.count(1, 2) == 7);
}

TEST_CASE("panel errors name the row") {
  auto message = [](const std::string& text) {
    try {
      read_panel(text);
    } catch (const IngestError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message("series_id,t,value\n1,1,4\n1,2,-5\n").find("row 3") != std::string::npos);
  CHECK(message("series_id,t,value\n1,1,4\n1,2,5\n1,1,6\n").find("row 4") != std::string::npos);
  CHECK(message("series_id,t,value\n1,1,x\n").find("row 2") != std::string::npos);
  CHECK(message("series_id,t,value\n1,1,4\n1,2,5\n2,1,3\n") != "no error");  // ragged
  CHECK(message("a,b,c\n1,1,1\n") != "no error");
  CHECK(message("series_id,t,category,value\n1,1,1,4\n1,1,2,5\n1,2,1,3\n1,2,3,1\n") !=
        "no error");  // inconsistent categories
}

TEST_CASE("edge list round trip") {
  DependencyGraph g(4);
  g.set_weight(0, 3, 0.25);
  g.set_weight(1, 2, 18.0);
  std::ostringstream out;
  write_edge_list(g, out);
  CHECK(out.str() == "i,j,weight\n1,4,0.25\n2,3,18\n");
  std::istringstream in(out.str());
  CHECK(read_edge_list(in, 4) == g);
  std::istringstream again(out.str());
  CHECK(read_edge_list(again).node_count() == 4);
  std::istringstream self("i,j,weight\n2,2,1\n");
  CHECK_THROWS_AS(read_edge_list(self), ValidationError);
  std::istringstream big("i,j,weight\n1,9,1\n");
  CHECK_THROWS_AS(read_edge_list(big, 4), ValidationError);
}

TEST_CASE("states round trip") {
  const ChangepointState s({{3, 10, 44}, {}, {7}});
  std::ostringstream out;
  write_states_csv(s, out);
  CHECK(out.str() == "series,k,positions\n1,3,3;10;44\n2,0,\n3,1,7\n");
  std::istringstream in(out.str());
  CHECK(read_states_csv(in) == s);
}

TEST_CASE("samples round trip including empty draws") {
  PosteriorSample sample;
  sample.series_count = 2;
  sample.length = 20;
  sample.thin = 2;
  LaggedState a{ChangepointState({{5}, {}})};
  a.windows = {3, 0};
  a.lags = {{2}, {}};
  LaggedState b{ChangepointState({{}, {}})};
  sample.append(a, 0.0, false);
  sample.append(a, 0.0, true);
  sample.append(b, 0.0, false);
  sample.append(a, 0.0, false);
  std::ostringstream out;
  write_samples_csv(sample, out);
  CHECK(out.str() ==
        "iteration,series,position,lag,window\n2,1,7,2,3\n4,1,7,2,3\n8,1,7,2,3\n");
  std::istringstream in(out.str());
  const auto back = read_samples_csv(in, 2, 20, 2, 4);
  CHECK(back.draw_count() == 4);
  CHECK(back.series_histogram(0) == sample.series_histogram(0));
  CHECK(back.series_histogram(1) == sample.series_histogram(1));
}

TEST_CASE("marginal and score files") {
  MarginalSummary m;
  m.k_probs = {{0.25, 0.75}};
  m.s_probs = {{0.5, 0.0}};
  std::ostringstream k;
  write_k_marginals_csv(m, k);
  CHECK(k.str() == "series,k,probability\n1,0,0.25\n1,1,0.75\n");
  std::ostringstream s;
  write_s_marginals_csv(m, s);
  CHECK(s.str() == "series,t,probability\n1,2,0.5\n1,3,0\n");

  const ChangepointState est({{5}, {}});
  ConnectednessScores sc;
  sc.c = {{0.5}, {}};
  sc.m = {0.5, 0.0};
  std::ostringstream scores;
  write_scores_csv(est, sc, scores);
  CHECK(scores.str() == "series,k,m\n1,1,0.5\n2,0,0\n");
  std::ostringstream conn;
  write_connectedness_csv(est, sc, conn);
  CHECK(conn.str() == "series,j,position,c\n1,1,5,0.5\n");
}

TEST_CASE("auth ingestion aggregates hourly counts per source") {
  const auto r = ingest(
      "time,user,source,destination\n"
      "0,U1,C1,D1\n"
      "10,U1,C1,D2\n"
      "3700,U1,C2,D1\n"
      "7300,U2,C2,D3\n");
  CHECK(r.users == std::vector<std::string>{"U1", "U2"});
  CHECK(r.sources == std::vector<std::string>{"C1", "C2"});
  CHECK(r.panel.length() == 3);
  CHECK(r.panel.vector_at(0, 1)[0] == 2);
  CHECK(r.panel.vector_at(0, 2)[1] == 1);
  CHECK(r.panel.vector_at(1, 3)[1] == 1);
  CHECK(r.first_hour == 0);
  // Both users used C2 on day 0.
  CHECK(r.graph.edges().size() == 1);
}

TEST_CASE("shared source on different days only still gives one edge") {
  const auto r = ingest(
      "0,U1,C1,D1\n"
      "90000,U2,C1,D1\n"
      "200000,U1,C1,D1\n"
      "200100,U2,C1,D1\n"
      "300000,U1,C1,D1\n"
      "300100,U2,C1,D1\n");
  CHECK(r.graph.edges().size() == 1);
  CHECK(r.graph.weight(0, 1) == 1.0);
}

TEST_CASE("different days, no common day, no edge") {
  const auto r = ingest("0,U1,C1,D1\n90000,U2,C1,D1\n");
  CHECK(r.graph.edges().empty());
}

TEST_CASE("busy user-source pairs are dropped before aggregation") {
  std::string text;
  for (int n = 0; n < 6; ++n) text += std::to_string(n) + ",U1,C1,D1\n";
  text += "4000,U1,C2,D1\n7300,U2,C1,D1\n";
  const auto r = ingest(text, 5, 300);
  CHECK(r.dropped_pair_events == 6);
  CHECK(r.sources == std::vector<std::string>{"C1", "C2"});
  CHECK(r.panel.vector_at(0, 1)[0] == 0);
  CHECK(r.graph.edges().empty());
}

TEST_CASE("sources with too many users are dropped") {
  const auto r = ingest(
      "0,U1,C1,D1\n1,U2,C1,D1\n2,U3,C1,D1\n"
      "4000,U1,C2,D1\n8000,U2,C2,D1\n",
      5000, 2);
  CHECK(r.dropped_source_events == 3);
  CHECK(r.sources == std::vector<std::string>{"C2"});
  CHECK(r.users == std::vector<std::string>{"U1", "U2"});
  CHECK(r.graph.edges().size() == 1);
}

TEST_CASE("unparseable rows are skipped and counted") {
  const auto r = ingest("0,U1,C1,D1\nbad,row\nx,U1,C1,D1\n3600,U1,C1,D1\n");
  CHECK(r.skipped_rows == 2);
  CHECK(r.panel.length() == 2);
  CHECK_THROWS_AS(ingest("time,user,source,destination\nbad\n"), IngestError);
}

TEST_CASE("sha256 of known strings") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
