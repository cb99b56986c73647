#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "handsel/dates.hpp"

namespace handsel {

struct MatchRecord {
    std::string match_id;
    Timestamp start_time;
    std::string competition_id;
    int importance = 1; // competition tier 1 (highest) .. 5 (friendly)
    Date season_final_date;
    std::string home_team_id;
    std::string away_team_id;
    std::optional<int> home_goals; // both empty for future fixtures
    std::optional<int> away_goals;
    double venue_lat = 0.0;
    double venue_lon = 0.0;

    bool operator==(const MatchRecord&) const = default;
};

struct TeamRecord {
    std::string team_id;
    std::string name;
    std::string club_country; // ISO code, compared against player nationality
    double home_lat = 0.0;
    double home_lon = 0.0;
    // Venue clock relative to UTC; kick-off hours are a local-time notion.
    // Optional column in the CSV, 0 when absent (timestamps already local).
    int utc_offset_min = 0;

    bool operator==(const TeamRecord&) const = default;
};

enum class Position { Wing, Back, Pivot, Goalkeeper };

std::string_view position_name(Position p);
Position parse_position(const std::string& text, int line_number);

// One row per player per season: squads are season snapshots.
struct PlayerRecord {
    std::string player_id;
    std::string team_id;
    std::string season; // e.g. "2021/2022", July-to-June span
    Position position = Position::Wing;
    double height_cm = 0.0;
    double weight_kg = 0.0;
    Date birth_date;
    std::string nationality;
    bool is_international = false;

    bool operator==(const PlayerRecord&) const = default;
};

struct SynthConfig {
    int n_teams = 14;
    int n_seasons = 4;
    int rounds_per_season = 1; // double round-robins per season
    double home_advantage = 0.03;
    double base_mean_goals = 27.9;
    double strength_spread = 0.10;
    std::pair<double, double> noise_nu_range{1.2, 2.2};
    std::uint64_t seed = 42;

    void validate() const;
};

struct SynthData {
    std::vector<MatchRecord> matches;
    std::vector<TeamRecord> teams;
    std::vector<PlayerRecord> players;
};

// CSV parsing with full invariant checking; duplicates rejected.
std::vector<MatchRecord> parse_matches(const std::string& path);
std::vector<TeamRecord> parse_teams(const std::string& path);
std::vector<PlayerRecord> parse_players(const std::string& path);

void write_matches(const std::string& path, const std::vector<MatchRecord>& records);
void write_teams(const std::string& path, const std::vector<TeamRecord>& records);
void write_players(const std::string& path, const std::vector<PlayerRecord>& records);

// Calibrated synthetic league; fully reproducible from config.seed.
SynthData generate_synthetic(const SynthConfig& config);

struct SplitResult {
    std::vector<MatchRecord> train; // strictly before cutoff
    std::vector<MatchRecord> test;  // at or after cutoff
};

SplitResult temporal_split(const std::vector<MatchRecord>& matches, const Date& cutoff);

} // namespace handsel
