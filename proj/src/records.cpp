#include "handsel/records.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "handsel/csv.hpp"
#include "handsel/error.hpp"

namespace handsel {

namespace {

const std::vector<std::string> kMatchHeader = {
    "match_id",  "start_time",   "competition_id", "importance",
    "season_final_date", "home_team_id", "away_team_id",
    "home_goals", "away_goals",  "venue_lat",      "venue_lon"};
const std::vector<std::string> kTeamHeader = {"team_id", "name", "club_country",
                                              "home_lat", "home_lon", "utc_offset_min"};
const std::vector<std::string> kPlayerHeader = {
    "player_id", "team_id",  "season",     "position",    "height_cm",
    "weight_kg", "birth_date", "nationality", "is_international"};

void require_header(const CsvTable& table, const std::vector<std::string>& expected,
                    const std::string& path) {
    if (table.header != expected) {
        throw Error(ErrorCode::malformed_row,
                    path + ": header mismatch, expected '" + join_csv_line(expected) +
                        "', got '" + join_csv_line(table.header) + "'");
    }
}

[[noreturn]] void bad_value(int line, const std::string& field, const std::string& value) {
    throw Error(ErrorCode::invariant_violation, "line " + std::to_string(line) + ": field '" +
                                                    field + "' out of range: '" + value + "'");
}

void check_coord(double lat, double lon, int line) {
    if (lat < -90.0 || lat > 90.0) bad_value(line, "lat", std::to_string(lat));
    if (lon < -180.0 || lon > 180.0) bad_value(line, "lon", std::to_string(lon));
}

std::optional<int> parse_goals(const std::string& text, int line, const std::string& field) {
    if (text.empty()) return std::nullopt; // future fixture
    const long long v = parse_int(text, line, field);
    if (v < 0) bad_value(line, field, text);
    return static_cast<int>(v);
}

void require_nonempty(const std::string& text, int line, const std::string& field) {
    if (text.empty()) {
        throw Error(ErrorCode::malformed_row,
                    "line " + std::to_string(line) + ": field '" + field + "' is empty");
    }
}

} // namespace

std::string_view position_name(Position p) {
    switch (p) {
        case Position::Wing: return "Wing";
        case Position::Back: return "Back";
        case Position::Pivot: return "Pivot";
        case Position::Goalkeeper: return "Goalkeeper";
    }
    return "?";
}

Position parse_position(const std::string& text, int line_number) {
    if (text == "Wing") return Position::Wing;
    if (text == "Back") return Position::Back;
    if (text == "Pivot") return Position::Pivot;
    if (text == "Goalkeeper") return Position::Goalkeeper;
    throw Error(ErrorCode::invariant_violation,
                "line " + std::to_string(line_number) + ": field 'position' must be one of "
                "Wing/Back/Pivot/Goalkeeper, got '" + text + "'");
}

void SynthConfig::validate() const {
    if (n_teams < 4 || n_teams % 2 != 0) {
        throw Error(ErrorCode::config, "synth config: n_teams must be even and >= 4");
    }
    if (n_seasons < 1) throw Error(ErrorCode::config, "synth config: n_seasons must be >= 1");
    if (rounds_per_season < 1) {
        throw Error(ErrorCode::config, "synth config: rounds_per_season must be >= 1");
    }
    if (!(base_mean_goals > 0.0)) {
        throw Error(ErrorCode::config, "synth config: base_mean_goals must be > 0");
    }
    if (!(strength_spread >= 0.0)) {
        throw Error(ErrorCode::config, "synth config: strength_spread must be >= 0");
    }
    if (!(noise_nu_range.first > 0.0) || !(noise_nu_range.second >= noise_nu_range.first)) {
        throw Error(ErrorCode::config, "synth config: noise_nu_range must be 0 < lo <= hi");
    }
}

std::vector<MatchRecord> parse_matches(const std::string& path) {
    const CsvTable table = read_csv(path);
    require_header(table, kMatchHeader, path);
    std::vector<MatchRecord> out;
    out.reserve(table.rows.size());
    std::set<std::string> seen;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& r = table.rows[i];
        const int line = table.line_numbers[i];
        MatchRecord m;
        m.match_id = r[0];
        require_nonempty(m.match_id, line, "match_id");
        if (!seen.insert(m.match_id).second) {
            throw Error(ErrorCode::duplicate_id,
                        "line " + std::to_string(line) + ": duplicate match_id '" +
                            m.match_id + "'");
        }
        m.start_time = parse_timestamp(r[1]);
        m.competition_id = r[2];
        require_nonempty(m.competition_id, line, "competition_id");
        const long long importance = parse_int(r[3], line, "importance");
        if (importance < 1 || importance > 5) bad_value(line, "importance", r[3]);
        m.importance = static_cast<int>(importance);
        m.season_final_date = parse_date(r[4]);
        m.home_team_id = r[5];
        m.away_team_id = r[6];
        require_nonempty(m.home_team_id, line, "home_team_id");
        require_nonempty(m.away_team_id, line, "away_team_id");
        if (m.home_team_id == m.away_team_id) {
            throw Error(ErrorCode::invariant_violation,
                        "line " + std::to_string(line) + ": home and away teams are equal ('" +
                            m.home_team_id + "')");
        }
        m.home_goals = parse_goals(r[7], line, "home_goals");
        m.away_goals = parse_goals(r[8], line, "away_goals");
        if (m.home_goals.has_value() != m.away_goals.has_value()) {
            throw Error(ErrorCode::invariant_violation,
                        "line " + std::to_string(line) +
                            ": scores must be both present or both absent");
        }
        m.venue_lat = parse_double(r[9], line, "venue_lat");
        m.venue_lon = parse_double(r[10], line, "venue_lon");
        check_coord(m.venue_lat, m.venue_lon, line);
        if (m.season_final_date < m.start_time.utc_date()) {
            throw Error(ErrorCode::invariant_violation,
                        "line " + std::to_string(line) +
                            ": season_final_date precedes the match date");
        }
        out.push_back(std::move(m));
    }
    return out;
}

std::vector<TeamRecord> parse_teams(const std::string& path) {
    const CsvTable table = read_csv(path);
    // utc_offset_min is optional; files without it mean "timestamps are local"
    const std::vector<std::string> short_header(kTeamHeader.begin(), kTeamHeader.end() - 1);
    const bool has_offset = table.header == kTeamHeader;
    if (!has_offset) require_header(table, short_header, path);
    std::vector<TeamRecord> out;
    out.reserve(table.rows.size());
    std::set<std::string> seen;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& r = table.rows[i];
        const int line = table.line_numbers[i];
        TeamRecord t;
        t.team_id = r[0];
        require_nonempty(t.team_id, line, "team_id");
        if (!seen.insert(t.team_id).second) {
            throw Error(ErrorCode::duplicate_id, "line " + std::to_string(line) +
                                                     ": duplicate team_id '" + t.team_id + "'");
        }
        t.name = r[1];
        require_nonempty(t.name, line, "name");
        t.club_country = r[2];
        require_nonempty(t.club_country, line, "club_country");
        t.home_lat = parse_double(r[3], line, "home_lat");
        t.home_lon = parse_double(r[4], line, "home_lon");
        check_coord(t.home_lat, t.home_lon, line);
        if (has_offset) t.utc_offset_min = static_cast<int>(parse_int(r[5], line, "utc_offset_min"));
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<PlayerRecord> parse_players(const std::string& path) {
    const CsvTable table = read_csv(path);
    require_header(table, kPlayerHeader, path);
    std::vector<PlayerRecord> out;
    out.reserve(table.rows.size());
    std::set<std::pair<std::string, std::string>> seen; // (player_id, season)
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& r = table.rows[i];
        const int line = table.line_numbers[i];
        PlayerRecord p;
        p.player_id = r[0];
        require_nonempty(p.player_id, line, "player_id");
        p.team_id = r[1];
        require_nonempty(p.team_id, line, "team_id");
        p.season = r[2];
        require_nonempty(p.season, line, "season");
        // rows are per-season snapshots, so the identifier is (player, season)
        if (!seen.insert({p.player_id, p.season}).second) {
            throw Error(ErrorCode::duplicate_id,
                        "line " + std::to_string(line) + ": duplicate player_id '" +
                            p.player_id + "' within season " + p.season);
        }
        p.position = parse_position(r[3], line);
        p.height_cm = parse_double(r[4], line, "height_cm");
        if (p.height_cm < 140.0 || p.height_cm > 230.0) bad_value(line, "height_cm", r[4]);
        p.weight_kg = parse_double(r[5], line, "weight_kg");
        if (p.weight_kg < 40.0 || p.weight_kg > 150.0) bad_value(line, "weight_kg", r[5]);
        p.birth_date = parse_date(r[6]);
        p.nationality = r[7];
        require_nonempty(p.nationality, line, "nationality");
        if (r[8] != "0" && r[8] != "1") bad_value(line, "is_international", r[8]);
        p.is_international = r[8] == "1";
        out.push_back(std::move(p));
    }
    return out;
}

void write_matches(const std::string& path, const std::vector<MatchRecord>& records) {
    CsvTable table;
    table.header = kMatchHeader;
    for (const auto& m : records) {
        table.rows.push_back({m.match_id, format_timestamp(m.start_time), m.competition_id,
                              std::to_string(m.importance), format_date(m.season_final_date),
                              m.home_team_id, m.away_team_id,
                              m.home_goals ? std::to_string(*m.home_goals) : "",
                              m.away_goals ? std::to_string(*m.away_goals) : "",
                              format_double(m.venue_lat), format_double(m.venue_lon)});
    }
    write_csv(path, table);
}

void write_teams(const std::string& path, const std::vector<TeamRecord>& records) {
    CsvTable table;
    table.header = kTeamHeader;
    for (const auto& t : records) {
        table.rows.push_back({t.team_id, t.name, t.club_country, format_double(t.home_lat),
                              format_double(t.home_lon), std::to_string(t.utc_offset_min)});
    }
    write_csv(path, table);
}

void write_players(const std::string& path, const std::vector<PlayerRecord>& records) {
    CsvTable table;
    table.header = kPlayerHeader;
    for (const auto& p : records) {
        table.rows.push_back({p.player_id, p.team_id, p.season, std::string(position_name(p.position)),
                              format_double(p.height_cm), format_double(p.weight_kg),
                              format_date(p.birth_date), p.nationality,
                              p.is_international ? "1" : "0"});
    }
    write_csv(path, table);
}

SplitResult temporal_split(const std::vector<MatchRecord>& matches, const Date& cutoff) {
    SplitResult result;
    for (const auto& m : matches) {
        if (m.start_time.utc_date() < cutoff) {
            result.train.push_back(m);
        } else {
            result.test.push_back(m);
        }
    }
    if (result.train.empty() || result.test.empty()) {
        throw Error(ErrorCode::empty_split,
                    "temporal split at " + format_date(cutoff) + " leaves an empty side (" +
                        std::to_string(result.train.size()) + " train / " +
                        std::to_string(result.test.size()) + " test)");
    }
    return result;
}

} // namespace handsel
