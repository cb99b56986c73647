#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "handsel/cmp.hpp"
#include "handsel/records.hpp"

using namespace handsel;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path tmp_dir() {
    const fs::path dir = fs::temp_directory_path() / "handsel_synth_test";
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("generator is reproducible down to the written bytes") {
    const SynthConfig config; // defaults, seed 42
    const SynthData a = generate_synthetic(config);
    const SynthData b = generate_synthetic(config);
    CHECK(a.matches == b.matches);
    CHECK(a.teams == b.teams);
    CHECK(a.players == b.players);

    const auto dir = tmp_dir();
    write_matches((dir / "m1.csv").string(), a.matches);
    write_matches((dir / "m2.csv").string(), b.matches);
    CHECK(slurp(dir / "m1.csv") == slurp(dir / "m2.csv"));

    SynthConfig other = config;
    other.seed = 43;
    const SynthData c = generate_synthetic(other);
    CHECK(a.matches != c.matches);
}

TEST_CASE("generated records survive their own parsers' validation") {
    const SynthData data = generate_synthetic(SynthConfig{});
    const auto dir = tmp_dir();
    write_matches((dir / "matches.csv").string(), data.matches);
    write_teams((dir / "teams.csv").string(), data.teams);
    write_players((dir / "players.csv").string(), data.players);
    // parsers enforce every schema invariant; equality proves the round-trip
    CHECK(parse_matches((dir / "matches.csv").string()) == data.matches);
    CHECK(parse_teams((dir / "teams.csv").string()) == data.teams);
    CHECK(parse_players((dir / "players.csv").string()) == data.players);
}

TEST_CASE("schedule shape: double round robin per season, evenly dated") {
    const SynthConfig config; // 14 teams, 4 seasons
    const SynthData data = generate_synthetic(config);
    CHECK(data.teams.size() == 14);
    CHECK(data.matches.size() == 14 * 13 * 4);       // ordered pairs once per season
    CHECK(data.players.size() == 14u * 14u * 4u);    // 14-player squads per season

    // every ordered pair hosted exactly once within a season
    std::map<std::string, int> hosted;
    for (const auto& m : data.matches) {
        if (season_start_year(m.start_time.utc_date()) != 2021) continue;
        ++hosted[m.home_team_id + "|" + m.away_team_id];
    }
    CHECK(hosted.size() == 14 * 13);
    for (const auto& [pair, count] : hosted) {
        CAPTURE(pair);
        CHECK(count == 1);
    }

    // one game per team per matchday; dates inside the season window
    std::set<std::pair<std::string, std::string>> team_day;
    for (const auto& m : data.matches) {
        const std::string day = format_date(m.start_time.utc_date());
        CHECK(team_day.insert({m.home_team_id, day}).second);
        CHECK(team_day.insert({m.away_team_id, day}).second);
        CHECK(m.start_time.utc_date() <= m.season_final_date);
    }

    // chronological emission
    for (std::size_t i = 1; i < data.matches.size(); ++i) {
        CHECK(data.matches[i - 1].start_time.seconds <= data.matches[i].start_time.seconds);
    }
}

TEST_CASE("goal calibration: league mean near 27.9, per-team under-dispersion") {
    const SynthData data = generate_synthetic(SynthConfig{});
    std::map<std::string, std::vector<int>> scored;
    for (const auto& m : data.matches) {
        scored[m.home_team_id].push_back(*m.home_goals);
        scored[m.away_team_id].push_back(*m.away_goals);
    }
    REQUIRE(scored.size() == 14);
    double grand = 0.0;
    for (const auto& [team, goals] : scored) {
        double mean = 0.0;
        for (int g : goals) mean += g;
        mean /= static_cast<double>(goals.size());
        grand += mean;
        const double di = dispersion_index(goals);
        CAPTURE(team);
        CHECK(di > 0.2);
        CHECK(di < 1.3);
    }
    grand /= static_cast<double>(scored.size());
    CHECK(grand > 26.9);
    CHECK(grand < 28.9);
}

TEST_CASE("no home edge when advantage and spread are zero") {
    SynthConfig config;
    config.home_advantage = 0.0;
    config.strength_spread = 0.0;
    config.n_seasons = 6;
    const SynthData data = generate_synthetic(config);
    double home = 0.0, away = 0.0;
    for (const auto& m : data.matches) {
        home += *m.home_goals;
        away += *m.away_goals;
    }
    home /= static_cast<double>(data.matches.size());
    away /= static_cast<double>(data.matches.size());
    CHECK(std::abs(home - away) < 0.6);
}

TEST_CASE("squads look like handball squads") {
    const SynthData data = generate_synthetic(SynthConfig{});
    int locals = 0, internationals = 0;
    std::map<Position, int> by_pos;
    std::map<std::string, std::string> country_of;
    for (const auto& t : data.teams) country_of[t.team_id] = t.club_country;
    for (const auto& p : data.players) {
        ++by_pos[p.position];
        if (p.nationality == country_of[p.team_id]) ++locals;
        if (p.is_international) ++internationals;
        CHECK(p.height_cm >= 150.0);
        CHECK(p.height_cm <= 215.0);
        CHECK(p.weight_kg >= 45.0);
        CHECK(p.weight_kg <= 130.0);
        const Date season_start{2021 + (p.season[3] - '1'), 7, 1};
        (void)season_start;
    }
    const double total = static_cast<double>(data.players.size());
    CHECK(by_pos[Position::Wing] == 4 * 14 * 4);
    CHECK(by_pos[Position::Back] == 6 * 14 * 4);
    CHECK(by_pos[Position::Pivot] == 2 * 14 * 4);
    CHECK(by_pos[Position::Goalkeeper] == 2 * 14 * 4);
    CHECK(locals / total > 0.45); // 0.6 direct + foreign draws that coincide
    CHECK(locals / total < 0.85);
    CHECK(internationals / total > 0.20);
    CHECK(internationals / total < 0.50);
}

TEST_CASE("config invariants are enforced") {
    SynthConfig odd;
    odd.n_teams = 7;
    CHECK_THROWS(generate_synthetic(odd));
    SynthConfig tiny;
    tiny.n_teams = 2;
    CHECK_THROWS(generate_synthetic(tiny));
    SynthConfig bad_nu;
    bad_nu.noise_nu_range = {2.0, 1.0};
    CHECK_THROWS(generate_synthetic(bad_nu));
}
