#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "fertbandit/session.hpp"
#include "test_support.hpp"

using namespace fertbandit;
using namespace fertbandit::testing;

namespace {

SessionState make_session(std::uint64_t seed = 0) {
  SessionState state;
  state.seed = seed;
  state.policy = PolicyKind::ModelUcb;
  state.fitted_kind = ModelKind::QuadraticPlateau;
  state.theta_init = default_initial_params(ModelKind::QuadraticPlateau);
  state.econ = {5.0, 0.7};
  state.grid_rates = standard_grid().rates();
  return state;
}

std::filesystem::path temp_state_path(const std::string& name) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove(path);
  return path;
}

}  // namespace

TEST_CASE("a noiseless transcript ends with the oracle recommendation") {
  SessionState state = make_session();
  const ParamVector truth = truth_params(ModelKind::QuadraticPlateau);
  for (int season = 0; season < 6; ++season) {
    const PendingRecommendation rec = session_next(state);
    CHECK(rec.burn_in);
    session_observe(state,
                    evaluate(ModelKind::QuadraticPlateau, truth, rec.rate));
  }
  // Burn-in covered every arm exactly once.
  std::set<double> rates;
  for (const auto& obs : state.history) rates.insert(obs.rate);
  CHECK(rates.size() == 6);

  const PendingRecommendation rec = session_next(state);
  CHECK(rec.rate == 150.0);
  CHECK(rec.has_scores);
  CHECK(rec.profit_estimate == doctest::Approx(857.5).epsilon(1e-6));
  CHECK(rec.uncertainty == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("strict alternation between next and observe") {
  SessionState state = make_session();
  CHECK_THROWS_AS(session_observe(state, 100.0), SessionError);
  session_next(state);
  CHECK_THROWS_AS(session_next(state), SessionError);
  session_observe(state, 101.5);
  CHECK(state.history.size() == 1);
  CHECK(state.history.back().profit ==
        doctest::Approx(5.0 * 101.5 - 0.7 * state.history.back().rate));
  CHECK_THROWS_AS(session_observe(state, 1.0), SessionError);
}

TEST_CASE("state file round-trips losslessly") {
  const auto path = temp_state_path("fertbandit_session_roundtrip.json");
  SessionState state = make_session(9);
  session_next(state);
  session_observe(state, 170.25);
  session_next(state);
  session_save(state, path.string());

  const SessionState loaded = session_load(path.string());
  CHECK(loaded.seed == state.seed);
  CHECK(loaded.policy == state.policy);
  CHECK(loaded.fitted_kind == state.fitted_kind);
  CHECK(loaded.theta_init == state.theta_init);
  CHECK(loaded.grid_rates == state.grid_rates);
  REQUIRE(loaded.history.size() == 1);
  CHECK(loaded.history[0].rate == state.history[0].rate);
  CHECK(loaded.history[0].yield == 170.25);
  CHECK(loaded.history[0].profit == state.history[0].profit);
  REQUIRE(loaded.pending.has_value());
  CHECK(loaded.pending->rate == state.pending->rate);
  CHECK(loaded.pending->arm_index == state.pending->arm_index);

  // No temp file is left behind.
  CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  std::filesystem::remove(path);
}

TEST_CASE("replaying a transcript reproduces every recommendation") {
  const std::vector<double> yields{80.2, 131.9, 170.4, 192.1, 198.5, 199.2,
                                   197.7, 193.0};
  auto run_transcript = [&](PolicyKind policy) {
    SessionState state = make_session(4242);
    state.policy = policy;
    std::vector<double> recs;
    for (double y : yields) {
      recs.push_back(session_next(state).rate);
      session_observe(state, y);
    }
    return recs;
  };
  for (PolicyKind policy : {PolicyKind::ModelUcb, PolicyKind::EpsGreedy,
                            PolicyKind::Violin, PolicyKind::KnnUcb}) {
    CHECK(run_transcript(policy) == run_transcript(policy));
  }
}

TEST_CASE("recommendations survive a save/load cycle unchanged") {
  const auto path = temp_state_path("fertbandit_session_persist.json");
  // In-memory session.
  SessionState mem = make_session(7);
  std::vector<double> direct;
  for (int season = 0; season < 7; ++season) {
    direct.push_back(session_next(mem).rate);
    session_observe(mem, 100.0 + 10.0 * season);
  }
  // Same transcript through the file.
  SessionState disk = make_session(7);
  session_save(disk, path.string());
  std::vector<double> persisted;
  for (int season = 0; season < 7; ++season) {
    SessionState s1 = session_load(path.string());
    persisted.push_back(session_next(s1).rate);
    session_save(s1, path.string());
    SessionState s2 = session_load(path.string());
    session_observe(s2, 100.0 + 10.0 * season);
    session_save(s2, path.string());
  }
  CHECK(direct == persisted);
  std::filesystem::remove(path);
}

TEST_CASE("atomic write replaces content completely") {
  const auto path = temp_state_path("fertbandit_atomic.txt");
  write_file_atomic(path.string(), "first version\n");
  write_file_atomic(path.string(), "second version\n");
  std::ifstream in(path);
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  CHECK(content == "second version\n");
  CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  std::filesystem::remove(path);
}

TEST_CASE("status text reports the fit and continuous optimum") {
  SessionState state = make_session();
  const ParamVector truth = truth_params(ModelKind::QuadraticPlateau);
  for (int season = 0; season < 6; ++season) {
    const PendingRecommendation rec = session_next(state);
    session_observe(state,
                    evaluate(ModelKind::QuadraticPlateau, truth, rec.rate));
  }
  const std::string text = session_status_text(state);
  CHECK(text.find("fitted parameters") != std::string::npos);
  CHECK(text.find("continuous profit-maximizing rate") != std::string::npos);
}
