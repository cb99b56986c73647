#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "handsel/csv.hpp"
#include "handsel/error.hpp"
#include "handsel/features.hpp"
#include "handsel/records.hpp"
#include "handsel/strength.hpp"

using namespace handsel;
namespace fs = std::filesystem;

namespace {

// 50-digit frozen references from an independent great-circle computation.
constexpr double kParisLondonKm = 343.55606034104199018464592685570131725;
constexpr double kHalfCircumferenceKm = 20015.086796020572722245500994873712875;
constexpr double kSqrt50 = 7.0710678118654752440084436210484903928;

template <typename F>
std::optional<ErrorCode> code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return std::nullopt;
}

PlayerRecord mk_player(std::string id, std::string team, Position pos, double h, double w,
                       Date birth, std::string nat, bool intl) {
    PlayerRecord p;
    p.player_id = std::move(id);
    p.team_id = std::move(team);
    p.season = "2021/2022";
    p.position = pos;
    p.height_cm = h;
    p.weight_kg = w;
    p.birth_date = birth;
    p.nationality = std::move(nat);
    p.is_international = intl;
    return p;
}

// Two-team world: A in France (UTC+60min), B in Portugal (UTC+0).
std::vector<TeamRecord> two_teams() {
    return {{"A", "Alpha", "FRA", 48.0, 7.0, 60}, {"B", "Beta", "PRT", 41.0, -8.6, 0}};
}

// Mirrored squads: one player per position with identical bodies, so every
// diff feature must vanish. Nationalities/international flags differ.
std::vector<PlayerRecord> mirrored_squads() {
    std::vector<PlayerRecord> ps;
    const Position pos[] = {Position::Wing, Position::Back, Position::Pivot,
                            Position::Goalkeeper};
    for (int i = 0; i < 4; ++i) {
        ps.push_back(mk_player("a" + std::to_string(i), "A", pos[i], 170.0 + i, 65.0 + i,
                               {1995, 3, 10}, i < 2 ? "FRA" : "ESP", i == 0));
        ps.push_back(mk_player("b" + std::to_string(i), "B", pos[i], 170.0 + i, 65.0 + i,
                               {1995, 3, 10}, "PRT", i < 3));
    }
    return ps;
}

MatchRecord fixture_at_a() {
    MatchRecord m;
    m.match_id = "f1";
    m.start_time = parse_timestamp("2021-10-03T17:00:00Z"); // Sunday, 18:00 in France
    m.competition_id = "L1";
    m.importance = 2;
    m.season_final_date = {2022, 6, 5};
    m.home_team_id = "A";
    m.away_team_id = "B";
    m.home_goals = 30;
    m.away_goals = 26;
    m.venue_lat = 48.0;
    m.venue_lon = 7.0;
    return m;
}

} // namespace

TEST_CASE("haversine: frozen references, symmetry, domain checks") {
    CHECK(haversine_km(48.0, 7.0, 48.0, 7.0) == 0.0);
    const double paris_london = haversine_km(48.8566, 2.3522, 51.5074, -0.1278);
    CHECK(std::abs(paris_london - kParisLondonKm) < 1e-9);
    CHECK(haversine_km(51.5074, -0.1278, 48.8566, 2.3522) == doctest::Approx(paris_london));
    CHECK(std::abs(haversine_km(0.0, 0.0, 0.0, 180.0) - kHalfCircumferenceKm) < 1e-8);
    CHECK(code_of([] { haversine_km(91.0, 0.0, 0.0, 0.0); }) == ErrorCode::domain);
    CHECK(code_of([] { haversine_km(0.0, 181.0, 0.0, 0.0); }) == ErrorCode::domain);
}

TEST_CASE("targets: outcome follows the goal comparison") {
    MatchRecord m = fixture_at_a();
    CHECK(make_targets(m).outcome == Outcome::HomeWin); // 30-26
    m.home_goals = 25;
    m.away_goals = 25;
    CHECK(make_targets(m).outcome == Outcome::Draw);
    m.home_goals = 24;
    m.away_goals = 32;
    CHECK(make_targets(m).outcome == Outcome::AwayWin);
    m.home_goals.reset();
    m.away_goals.reset();
    CHECK(code_of([&] { make_targets(m); }) == ErrorCode::missing_score);
}

TEST_CASE("squad aggregates: hand-computed mean/std, singleton, empty group") {
    std::vector<PlayerRecord> ps = {
        mk_player("w1", "A", Position::Wing, 170.0, 60.0, {2000, 7, 1}, "FRA", false),
        mk_player("w2", "A", Position::Wing, 180.0, 64.0, {1990, 7, 1}, "FRA", false),
        mk_player("g1", "A", Position::Goalkeeper, 175.0, 70.0, {1995, 7, 1}, "FRA", false),
    };
    std::vector<const PlayerRecord*> squad;
    for (const auto& p : ps) squad.push_back(&p);
    const Date as_of{2020, 7, 1};

    CHECK(*squad_aggregate(squad, Position::Wing, Stat::height, Moment::avg, as_of) == 175.0);
    CHECK(std::abs(*squad_aggregate(squad, Position::Wing, Stat::height, Moment::std_dev, as_of) -
                   kSqrt50) < 1e-12);
    CHECK(*squad_aggregate(squad, Position::Goalkeeper, Stat::height, Moment::std_dev, as_of) ==
          0.0);
    CHECK_FALSE(squad_aggregate(squad, Position::Pivot, Stat::weight, Moment::avg, as_of));
    // ages in fractional years at the as-of date
    CHECK(*squad_aggregate(squad, Position::Wing, Stat::age, Moment::avg, as_of) ==
          doctest::Approx(25.0).epsilon(1e-3));
}

TEST_CASE("build_features fills the classical block as documented") {
    FeatureBuilder builder(two_teams(), mirrored_squads(), nullptr);
    const FeatureRow row = builder.build(fixture_at_a(), false);
    REQUIRE(row.values.size() == static_cast<std::size_t>(kNumClassical));
    const auto names = feature_names(false);
    std::map<std::string, double> f;
    for (std::size_t i = 0; i < names.size(); ++i) f[names[i]] = row.values[i];

    CHECK(f["game_dow"] == 6.0);  // Sunday
    CHECK(f["game_hour"] == 18.0); // 17:00 UTC + 60 min venue offset
    CHECK(f["importance"] == 2.0);
    CHECK(f["days_to_final"] == 245.0);
    const double expect_travel = haversine_km(41.0, -8.6, 48.0, 7.0);
    CHECK(f["away_travel_km"] == expect_travel);
    CHECK(f["home_international"] == 0.25); // 1 of 4
    CHECK(f["away_international"] == 0.75);
    CHECK(f["home_locals"] == 0.5); // FRA,FRA,ESP,ESP
    CHECK(f["away_locals"] == 1.0);
    for (const auto& [name, value] : f) {
        if (name.rfind("diff_", 0) == 0) {
            CAPTURE(name);
            CHECK(value == 0.0); // mirrored squads
        }
    }
}

TEST_CASE("swapping home and away negates every diff feature") {
    auto players = mirrored_squads();
    // make the squads physically different so the diffs are non-trivial
    for (auto& p : players) {
        if (p.team_id == "A") {
            p.height_cm += 3.0;
            p.weight_kg += 2.5;
        }
    }
    FeatureBuilder builder(two_teams(), players, nullptr);
    const MatchRecord at_a = fixture_at_a();
    MatchRecord at_b = at_a;
    std::swap(at_b.home_team_id, at_b.away_team_id);
    at_b.venue_lat = 41.0; // B hosts at home
    at_b.venue_lon = -8.6;

    const FeatureRow fa = builder.build(at_a, false);
    const FeatureRow fb = builder.build(at_b, false);
    const auto names = feature_names(false);
    bool saw_nonzero = false;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i].rfind("diff_", 0) != 0) continue;
        CAPTURE(names[i]);
        CHECK(fa.values[i] == -fb.values[i]);
        if (fa.values[i] != 0.0) saw_nonzero = true;
    }
    CHECK(saw_nonzero);
    // shares swap sides rather than negate
    std::map<std::string, double> a, b;
    for (std::size_t i = 0; i < names.size(); ++i) {
        a[names[i]] = fa.values[i];
        b[names[i]] = fb.values[i];
    }
    CHECK(a["home_locals"] == b["away_locals"]);
    CHECK(a["away_international"] == b["home_international"]);
}

TEST_CASE("days_to_final is zero on the season's final day") {
    MatchRecord m = fixture_at_a();
    m.start_time = parse_timestamp("2022-06-05T16:00:00Z");
    FeatureBuilder builder(two_teams(), mirrored_squads(), nullptr);
    // season label of June 2022 is 2021/2022, same squads resolve
    const FeatureRow row = builder.build(m, false);
    CHECK(row.values[3] == 0.0);
}

TEST_CASE("unknown teams and missing squads are unresolved-roster errors") {
    FeatureBuilder builder(two_teams(), mirrored_squads(), nullptr);
    MatchRecord m = fixture_at_a();
    m.home_team_id = "Z";
    CHECK(code_of([&] { builder.build(m, false); }) == ErrorCode::unresolved_roster);

    MatchRecord next_season = fixture_at_a();
    next_season.start_time = parse_timestamp("2022-10-03T17:00:00Z"); // no 2022/2023 squads
    next_season.season_final_date = {2023, 6, 5};
    CHECK(code_of([&] { builder.build(next_season, false); }) == ErrorCode::unresolved_roster);
}

TEST_CASE("assemble_dataset on a synthetic league: SEL columns, issues, round-trip") {
    SynthConfig config;
    config.n_teams = 6;
    config.n_seasons = 2;
    const SynthData data = generate_synthetic(config);
    StrengthProvider strengths(data.matches, {"t01", "t02", "t03", "t04", "t05", "t06"});
    FeatureBuilder builder(data.teams, data.players, &strengths);

    Dataset ds = assemble_dataset(data.matches, builder, true, true);
    CHECK(ds.features.cols() == static_cast<std::size_t>(kNumFeatures));
    CHECK(ds.features.rows() == ds.match_ids.size());
    CHECK(ds.features.rows() == ds.targets.size());
    // opening matchdays have no history anywhere: skipped with a reason
    CHECK(!ds.issues.empty());
    CHECK(ds.features.rows() + ds.issues.size() == data.matches.size());
    for (const auto& issue : ds.issues) {
        CHECK(issue.find("skipped") != std::string::npos);
    }

    // nothing is missing on complete synthetic squads
    for (std::size_t r = 0; r < ds.features.rows(); ++r) {
        for (double v : ds.features.row(r)) CHECK(std::isfinite(v));
    }

    const auto path = (fs::temp_directory_path() / "handsel_features_roundtrip.csv").string();
    write_dataset(path, ds);
    const Dataset back = read_dataset(path);
    CHECK(back.feature_names == ds.feature_names);
    CHECK(back.match_ids == ds.match_ids);
    CHECK(back.features == ds.features); // bit-exact via shortest round-trip doubles
    CHECK(back.targets == ds.targets);
}

TEST_CASE("stored strength columns are reproducible from strictly earlier matches") {
    SynthConfig config;
    config.n_teams = 6;
    config.n_seasons = 2;
    const SynthData data = generate_synthetic(config);
    std::vector<std::string> ids;
    for (const auto& t : data.teams) ids.push_back(t.team_id);
    StrengthProvider strengths(data.matches, ids);
    FeatureBuilder builder(data.teams, data.players, &strengths);
    const Dataset ds = assemble_dataset(data.matches, builder, true, true);

    std::map<std::string, const MatchRecord*> by_id;
    for (const auto& m : data.matches) by_id[m.match_id] = &m;

    const auto names = feature_names(true);
    int checked = 0;
    for (std::size_t r = ds.features.rows() - 20; r < ds.features.rows(); ++r) {
        const MatchRecord& m = *by_id.at(ds.match_ids[r]);
        const Date as_of = m.start_time.utc_date();
        std::vector<MatchRecord> earlier;
        for (const auto& other : data.matches) {
            if (other.start_time.utc_date() < as_of) earlier.push_back(other);
        }
        const TeamStrength sh = strengths_asof(earlier, m.home_team_id, as_of);
        const TeamStrength sa = strengths_asof(earlier, m.away_team_id, as_of);
        CHECK(ds.features.at(r, 33) == sh.s_attack);
        CHECK(ds.features.at(r, 34) == sh.s_defense);
        CHECK(ds.features.at(r, 35) == sa.s_attack);
        CHECK(ds.features.at(r, 36) == sa.s_defense);
        ++checked;
    }
    CHECK(checked == 20);
}

TEST_CASE("imputation fills holes with training medians and flags dead columns") {
    // hand-build a dataset with a hole in one diff column
    Dataset train;
    train.feature_names = feature_names(false);
    train.features = Matrix(0, train.feature_names.size());
    const int pivot_h_avg = 11; // diff_pivot_height_avg
    std::vector<double> row(train.feature_names.size(), 1.0);
    for (double v : {2.0, 4.0, 10.0}) {
        row[pivot_h_avg] = v;
        train.features.append_row(row);
        train.match_ids.push_back("m" + format_double(v));
        train.targets.push_back(TargetPair{30, 28, Outcome::HomeWin});
    }
    const ImputationTable table = fit_imputation(train);
    CHECK(table.medians[pivot_h_avg] == 4.0);

    Dataset test = train;
    test.features.at(1, pivot_h_avg) = std::numeric_limits<double>::quiet_NaN();
    CHECK(apply_imputation(test, table) == 1);
    CHECK(test.features.at(1, pivot_h_avg) == 4.0);

    // a column that never had a value cannot be imputed
    Dataset dead = train;
    for (std::size_t r = 0; r < dead.features.rows(); ++r) {
        dead.features.at(r, pivot_h_avg) = std::numeric_limits<double>::quiet_NaN();
    }
    const ImputationTable dead_table = fit_imputation(dead);
    CHECK(code_of([&] { apply_imputation(dead, dead_table); }) == ErrorCode::degenerate_sample);

    // writing with NaN holes is refused
    Dataset holey = train;
    holey.features.at(0, 0) = std::numeric_limits<double>::quiet_NaN();
    const auto path = (fs::temp_directory_path() / "handsel_holey.csv").string();
    CHECK(code_of([&] { write_dataset(path, holey); }) == ErrorCode::invariant_violation);
}

TEST_CASE("read_dataset rejects contradictory outcome labels") {
    Dataset ds;
    ds.feature_names = feature_names(false);
    ds.features = Matrix(0, ds.feature_names.size());
    std::vector<double> row(ds.feature_names.size(), 0.5);
    ds.features.append_row(row);
    ds.match_ids.push_back("m1");
    ds.targets.push_back(TargetPair{20, 25, Outcome::AwayWin});
    const auto path = (fs::temp_directory_path() / "handsel_bad_outcome.csv").string();
    write_dataset(path, ds);

    // corrupt the label in place
    std::string text;
    {
        std::ifstream in(path);
        std::getline(in, text);
        std::string row_text;
        std::getline(in, row_text);
        const auto pos = row_text.rfind("AwayWin");
        row_text.replace(pos, 7, "HomeWin");
        text += "\n" + row_text + "\n";
    }
    {
        std::ofstream out(path, std::ios::binary);
        out << text;
    }
    CHECK(code_of([&] { read_dataset(path); }) == ErrorCode::invariant_violation);
}
