#include <doctest.h>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "handsel/cmp.hpp"
#include "handsel/error.hpp"
#include "handsel/strength.hpp"

using namespace handsel;

namespace {

template <typename F>
std::optional<ErrorCode> code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return std::nullopt;
}

// 50-digit frozen references for the two strength functionals.
constexpr double kAttack_286_164 = 3.4497554331412921039342152222727719763; // ln(286.46)/1.64
constexpr double kDefense_20_2 = 0.66761640139066810612816561169649209224;  // 2/ln(20)

MatchRecord mk(std::string id, const std::string& date, std::string home, std::string away,
               int hg, int ag) {
    MatchRecord m;
    m.match_id = std::move(id);
    m.start_time = parse_timestamp(date + "T18:00:00Z");
    m.competition_id = "L1";
    m.importance = 2;
    const int sy = season_start_year(m.start_time.utc_date());
    m.season_final_date = {sy + 1, 6, 30};
    m.home_team_id = std::move(home);
    m.away_team_id = std::move(away);
    m.home_goals = hg;
    m.away_goals = ag;
    m.venue_lat = 48.0;
    m.venue_lon = 7.0;
    return m;
}

} // namespace

TEST_CASE("strength functionals: unit cases and frozen values") {
    const double e = std::exp(1.0);
    CHECK(attack_strength({e, 1.0}) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(defense_strength({e, 1.0}) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(attack_strength({286.46, 1.64}) - kAttack_286_164) < 1e-12);
    CHECK(std::abs(attack_strength({286.46, 1.64}) - 3.4498) < 1e-4);
    CHECK(std::abs(defense_strength({20.0, 2.0}) - kDefense_20_2) < 1e-12);
}

TEST_CASE("strength functionals reject the log-domain boundary") {
    CHECK(code_of([] { attack_strength({1.0, 2.0}); }) == ErrorCode::domain);
    CHECK(code_of([] { attack_strength({0.5, 2.0}); }) == ErrorCode::domain);
    CHECK(code_of([] { defense_strength({0.9, 0.0}); }) == ErrorCode::domain);
    CHECK(code_of([] { defense_strength({5.0, 0.0}); }) == ErrorCode::domain);
}

TEST_CASE("strength functionals are monotone in each parameter") {
    CHECK(attack_strength({5.0, 1.5}) > attack_strength({2.0, 1.5}));
    CHECK(attack_strength({20.0, 2.0}) < attack_strength({20.0, 1.0}));
    CHECK(defense_strength({5.0, 1.5}) < defense_strength({2.0, 1.5}));
    CHECK(defense_strength({20.0, 2.0}) > defense_strength({20.0, 1.0}));
}

TEST_CASE("strengths_asof matches the direct fitting chain on a season window") {
    const std::vector<int> scored = {30, 31, 29, 32, 30};
    const std::vector<int> conceded = {25, 24, 26, 25, 24};
    std::vector<MatchRecord> matches;
    const char* dates[] = {"2021-09-04", "2021-09-11", "2021-09-18", "2021-09-25", "2021-10-02"};
    for (int i = 0; i < 5; ++i) {
        // alternate venue so both home and away goals are pooled
        if (i % 2 == 0) {
            matches.push_back(mk("m" + std::to_string(i), dates[i], "A", "B", scored[i], conceded[i]));
        } else {
            matches.push_back(mk("m" + std::to_string(i), dates[i], "B", "A", conceded[i], scored[i]));
        }
    }

    const Date as_of{2021, 11, 1};
    const TeamStrength s = strengths_asof(matches, "A", as_of);
    CHECK(s.n_matches == 5);
    CHECK_FALSE(s.imputed);
    CHECK(std::isfinite(s.s_attack));
    CHECK(std::isfinite(s.s_defense));
    CHECK(s.s_attack > 0.0);
    CHECK(s.s_defense > 0.0);

    // identical to fitting the goal arrays directly (bit-for-bit)
    const FitResult att = fit_mle(scored);
    const FitResult def = fit_mle(conceded);
    CHECK(s.attack_params.lambda == att.params.lambda);
    CHECK(s.attack_params.nu == att.params.nu);
    CHECK(s.s_attack == attack_strength(att.params));
    CHECK(s.s_defense == defense_strength(def.params));
}

TEST_CASE("matches at or after as_of never contribute") {
    std::vector<MatchRecord> matches;
    const char* dates[] = {"2021-09-04", "2021-09-11", "2021-09-18", "2021-09-25", "2021-10-02"};
    const int scored[] = {28, 33, 30, 29, 31};
    for (int i = 0; i < 5; ++i) {
        matches.push_back(mk("m" + std::to_string(i), dates[i], "A", "B", scored[i], 24 + i % 3));
    }
    const Date as_of{2021, 10, 15};
    const TeamStrength base = strengths_asof(matches, "A", as_of);

    // a match on as_of itself and a later blowout must change nothing
    auto extended = matches;
    extended.push_back(mk("same_day", "2021-10-15", "A", "B", 45, 10));
    extended.push_back(mk("later", "2021-12-01", "B", "A", 11, 44));
    const TeamStrength again = strengths_asof(extended, "A", as_of);
    CHECK(again.s_attack == base.s_attack);
    CHECK(again.s_defense == base.s_defense);
    CHECK(again.attack_params.lambda == base.attack_params.lambda);
    CHECK(again.attack_params.nu == base.attack_params.nu);
    CHECK(again.defense_params.lambda == base.defense_params.lambda);
    CHECK(again.defense_params.nu == base.defense_params.nu);
    CHECK(again.n_matches == base.n_matches);
}

TEST_CASE("insufficient history raises, including the all-future case") {
    std::vector<MatchRecord> matches;
    for (int i = 0; i < 6; ++i) {
        matches.push_back(mk("m" + std::to_string(i), "2022-0" + std::to_string(2 + i % 4) + "-10",
                             "A", "B", 30 + i, 25));
    }
    // as_of before everything: empty window
    CHECK(code_of([&] { strengths_asof(matches, "A", {2021, 9, 1}); }) ==
          ErrorCode::insufficient_history);
    // unknown team
    CHECK(code_of([&] { strengths_asof(matches, "Z", {2022, 6, 1}); }) ==
          ErrorCode::insufficient_history);
}

TEST_CASE("window extends into the previous season when the ongoing one is short") {
    std::vector<MatchRecord> matches;
    // four matches late in 2020/2021
    const char* prev[] = {"2021-04-10", "2021-04-17", "2021-05-01", "2021-05-15"};
    for (int i = 0; i < 4; ++i) {
        matches.push_back(mk("p" + std::to_string(i), prev[i], "A", "B", 29 + i, 24));
    }
    // two matches early in 2021/2022
    matches.push_back(mk("c0", "2021-09-04", "A", "B", 31, 26));
    matches.push_back(mk("c1", "2021-09-11", "B", "A", 25, 30));

    const TeamStrength s = strengths_asof(matches, "A", {2021, 10, 1});
    CHECK(s.n_matches == 6); // 2 ongoing + 4 previous
    CHECK_FALSE(s.imputed);

    // two seasons back is out of the window: only the 6 above count, and
    // results must be identical with or without the stale match present.
    auto with_stale = matches;
    with_stale.insert(with_stale.begin(), mk("stale", "2019-10-05", "A", "B", 40, 20));
    const TeamStrength t = strengths_asof(with_stale, "A", {2021, 10, 1});
    CHECK(t.n_matches == 6);
    CHECK(t.s_attack == s.s_attack);
}

TEST_CASE("scoring five more goals per match strictly raises attack strength") {
    const auto goals = sample_cmp({286.46, 1.64}, 20, 21);
    const auto against = sample_cmp({286.46, 1.64}, 20, 22);
    std::vector<MatchRecord> base, boosted;
    for (int i = 0; i < 20; ++i) {
        const std::string date = i < 10 ? "2021-09-" + std::to_string(10 + i)
                                        : "2021-10-" + std::to_string(i);
        base.push_back(mk("m" + std::to_string(i), date, "A", "B", goals[i], against[i]));
        boosted.push_back(mk("m" + std::to_string(i), date, "A", "B", goals[i] + 5, against[i]));
    }
    const Date as_of{2021, 12, 1};
    const TeamStrength lo = strengths_asof(base, "A", as_of);
    const TeamStrength hi = strengths_asof(boosted, "A", as_of);
    CHECK(hi.s_attack > lo.s_attack);
}

TEST_CASE("provider imputes league-mean strengths for a team without history") {
    std::vector<MatchRecord> matches;
    const auto ga = sample_cmp({286.46, 1.64}, 8, 31);
    const auto gb = sample_cmp({286.46, 1.64}, 8, 32);
    for (int i = 0; i < 8; ++i) {
        const std::string date = "2021-09-" + std::to_string(10 + i);
        if (i % 2 == 0) {
            matches.push_back(mk("m" + std::to_string(i), date, "A", "B", ga[i], gb[i]));
        } else {
            matches.push_back(mk("m" + std::to_string(i), date, "B", "A", gb[i], ga[i]));
        }
    }
    const Date as_of{2022, 1, 15};
    StrengthProvider provider(matches, {"A", "B", "C"});

    const TeamStrength& a = provider.get("A", as_of);
    const TeamStrength& b = provider.get("B", as_of);
    CHECK_FALSE(a.imputed);
    CHECK_FALSE(b.imputed);

    const TeamStrength& c = provider.get("C", as_of);
    CHECK(c.imputed);
    CHECK(c.team_id == "C");
    CHECK(c.n_matches == 0);
    CHECK(c.s_attack == (a.s_attack + b.s_attack) / 2);
    CHECK(c.s_defense == (a.s_defense + b.s_defense) / 2);
    // synthesized parameters stay consistent with the strengths
    CHECK(attack_strength(c.attack_params) == doctest::Approx(c.s_attack).epsilon(1e-12));
    CHECK(defense_strength(c.defense_params) == doctest::Approx(c.s_defense).epsilon(1e-12));

    // fitted records satisfy the same consistency invariant exactly
    CHECK(a.s_attack == attack_strength(a.attack_params));
    CHECK(a.s_defense == defense_strength(a.defense_params));

    // memoization returns the same object; a fresh provider the same values
    CHECK(&provider.get("C", as_of) == &c);
    StrengthProvider fresh(matches, {"A", "B", "C"});
    CHECK(fresh.get("C", as_of).s_attack == c.s_attack);

    // nobody has history on opening day: imputation is impossible
    StrengthProvider empty(matches, {"A", "B", "C"});
    CHECK(code_of([&] { empty.get("C", {2021, 9, 1}); }) == ErrorCode::insufficient_history);
}
