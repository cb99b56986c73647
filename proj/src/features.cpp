#include "handsel/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "handsel/csv.hpp"
#include "handsel/error.hpp"

namespace handsel {

namespace {

constexpr double kEarthRadiusKm = 6371.0;
constexpr double kDaysPerYear = 365.2425;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

constexpr const char* kPositions[] = {"wing", "back", "pivot", "gk"};
constexpr const char* kStats[] = {"height", "weight", "age"};
constexpr const char* kMoments[] = {"avg", "std"};

constexpr Position kPositionOrder[] = {Position::Wing, Position::Back, Position::Pivot,
                                       Position::Goalkeeper};
constexpr Stat kStatOrder[] = {Stat::height, Stat::weight, Stat::age};
constexpr Moment kMomentOrder[] = {Moment::avg, Moment::std_dev};

std::vector<std::string> build_names() {
    std::vector<std::string> names = {
        "game_dow",      "game_hour",          "importance",
        "days_to_final", "away_travel_km",     "home_international",
        "away_international", "home_locals",   "away_locals",
    };
    for (const char* stat : kStats) {
        for (const char* moment : kMoments) {
            for (const char* pos : kPositions) {
                names.push_back(std::string("diff_") + pos + "_" + stat + "_" + moment);
            }
        }
    }
    names.insert(names.end(), {"attack_strength_home", "defense_strength_home",
                               "attack_strength_away", "defense_strength_away"});
    return names;
}

double deg2rad(double deg) { return deg * 0.017453292519943295769236907684886127134; }

double age_years(const Date& birth, const Date& as_of) {
    return static_cast<double>(days_from_civil(as_of) - days_from_civil(birth)) / kDaysPerYear;
}

} // namespace

const std::vector<std::string>& all_feature_names() {
    static const std::vector<std::string> names = build_names();
    return names;
}

std::vector<std::string> feature_names(bool include_sel) {
    const auto& all = all_feature_names();
    if (include_sel) return all;
    return {all.begin(), all.begin() + kNumClassical};
}

double haversine_km(double lat_a, double lon_a, double lat_b, double lon_b) {
    for (double lat : {lat_a, lat_b}) {
        if (lat < -90.0 || lat > 90.0) {
            throw Error(ErrorCode::domain, "latitude out of range: " + std::to_string(lat));
        }
    }
    for (double lon : {lon_a, lon_b}) {
        if (lon < -180.0 || lon > 180.0) {
            throw Error(ErrorCode::domain, "longitude out of range: " + std::to_string(lon));
        }
    }
    const double phi1 = deg2rad(lat_a);
    const double phi2 = deg2rad(lat_b);
    const double dphi = deg2rad(lat_b - lat_a);
    const double dlam = deg2rad(lon_b - lon_a);
    const double s1 = std::sin(dphi / 2.0);
    const double s2 = std::sin(dlam / 2.0);
    const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

std::string_view outcome_name(Outcome o) {
    switch (o) {
        case Outcome::HomeWin: return "HomeWin";
        case Outcome::Draw: return "Draw";
        case Outcome::AwayWin: return "AwayWin";
    }
    return "?";
}

Outcome parse_outcome(const std::string& text) {
    if (text == "HomeWin") return Outcome::HomeWin;
    if (text == "Draw") return Outcome::Draw;
    if (text == "AwayWin") return Outcome::AwayWin;
    throw Error(ErrorCode::malformed_row, "unknown outcome label: '" + text + "'");
}

TargetPair make_targets(const MatchRecord& match) {
    if (!match.home_goals || !match.away_goals) {
        throw Error(ErrorCode::missing_score,
                    "match '" + match.match_id + "' has no final score yet");
    }
    TargetPair t;
    t.home_goals = *match.home_goals;
    t.away_goals = *match.away_goals;
    t.outcome = t.home_goals > t.away_goals   ? Outcome::HomeWin
                : t.home_goals < t.away_goals ? Outcome::AwayWin
                                              : Outcome::Draw;
    return t;
}

std::optional<double> squad_aggregate(std::span<const PlayerRecord* const> squad, Position pos,
                                      Stat stat, Moment moment, const Date& as_of) {
    std::vector<double> values;
    for (const PlayerRecord* p : squad) {
        if (p->position != pos) continue;
        switch (stat) {
            case Stat::height: values.push_back(p->height_cm); break;
            case Stat::weight: values.push_back(p->weight_kg); break;
            case Stat::age: values.push_back(age_years(p->birth_date, as_of)); break;
        }
    }
    if (values.empty()) return std::nullopt;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    if (moment == Moment::avg) return mean;
    if (values.size() == 1) return 0.0;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / (static_cast<double>(values.size()) - 1.0)); // unbiased
}

FeatureBuilder::FeatureBuilder(std::vector<TeamRecord> teams, std::vector<PlayerRecord> players,
                               StrengthProvider* strengths)
    : teams_(std::move(teams)), players_(std::move(players)), strengths_(strengths) {
    for (std::size_t i = 0; i < teams_.size(); ++i) team_index_[teams_[i].team_id] = i;
    for (const auto& p : players_) rosters_[{p.team_id, p.season}].push_back(&p);
}

const TeamRecord& FeatureBuilder::team(const std::string& team_id) const {
    const auto it = team_index_.find(team_id);
    if (it == team_index_.end()) {
        throw Error(ErrorCode::unresolved_roster, "unknown team '" + team_id + "'");
    }
    return teams_[it->second];
}

std::vector<const PlayerRecord*> FeatureBuilder::roster(const std::string& team_id,
                                                        const std::string& season) const {
    const auto it = rosters_.find({team_id, season});
    if (it == rosters_.end() || it->second.empty()) {
        throw Error(ErrorCode::unresolved_roster,
                    "no squad for team '" + team_id + "' in season " + season);
    }
    return it->second;
}

FeatureRow FeatureBuilder::build(const MatchRecord& match, bool include_sel) {
    if (include_sel && strengths_ == nullptr) {
        throw Error(ErrorCode::config, "feature builder has no strength provider");
    }
    const TeamRecord& home = team(match.home_team_id);
    const TeamRecord& away = team(match.away_team_id);
    const Date match_date = match.start_time.utc_date(); // as-of anchor
    const std::string season = season_label(match_date);
    const auto home_squad = roster(home.team_id, season);
    const auto away_squad = roster(away.team_id, season);

    FeatureRow row;
    row.match_id = match.match_id;
    row.values.reserve(include_sel ? kNumFeatures : kNumClassical);

    // kick-off is a local-clock notion at the venue (= home team's hall)
    const Date local_date = match.start_time.local_date(home.utc_offset_min);
    row.values.push_back(weekday(local_date));
    row.values.push_back(match.start_time.local_hour(home.utc_offset_min));
    row.values.push_back(match.importance);
    row.values.push_back(static_cast<double>(days_from_civil(match.season_final_date) -
                                             days_from_civil(local_date)));
    row.values.push_back(haversine_km(away.home_lat, away.home_lon, match.venue_lat,
                                      match.venue_lon));

    const auto share = [](const std::vector<const PlayerRecord*>& squad, auto&& pred) {
        int hits = 0;
        for (const PlayerRecord* p : squad) {
            if (pred(*p)) ++hits;
        }
        return static_cast<double>(hits) / static_cast<double>(squad.size());
    };
    row.values.push_back(share(home_squad, [](const PlayerRecord& p) { return p.is_international; }));
    row.values.push_back(share(away_squad, [](const PlayerRecord& p) { return p.is_international; }));
    row.values.push_back(share(home_squad, [&](const PlayerRecord& p) {
        return p.nationality == home.club_country;
    }));
    row.values.push_back(share(away_squad, [&](const PlayerRecord& p) {
        return p.nationality == away.club_country;
    }));

    for (Stat stat : kStatOrder) {
        for (Moment moment : kMomentOrder) {
            for (Position pos : kPositionOrder) {
                const auto h = squad_aggregate(home_squad, pos, stat, moment, match_date);
                const auto a = squad_aggregate(away_squad, pos, stat, moment, match_date);
                row.values.push_back(h && a ? *h - *a : kNaN);
            }
        }
    }

    if (include_sel) {
        const TeamStrength& sh = strengths_->get(home.team_id, match_date);
        const TeamStrength& sa = strengths_->get(away.team_id, match_date);
        row.values.push_back(sh.s_attack);
        row.values.push_back(sh.s_defense);
        row.values.push_back(sa.s_attack);
        row.values.push_back(sa.s_defense);
    }
    return row;
}

Dataset assemble_dataset(std::span<const MatchRecord> matches, FeatureBuilder& builder,
                         bool include_sel, bool require_targets) {
    Dataset ds;
    ds.feature_names = feature_names(include_sel);
    ds.features = Matrix(0, ds.feature_names.size());
    for (const auto& match : matches) {
        if (require_targets && (!match.home_goals || !match.away_goals)) {
            ds.issues.push_back(match.match_id + ": skipped, no final score");
            continue;
        }
        FeatureRow row;
        try {
            row = builder.build(match, include_sel);
        } catch (const Error& e) {
            ds.issues.push_back(match.match_id + ": skipped, " + std::string(e.what()));
            continue;
        }
        ds.match_ids.push_back(row.match_id);
        ds.features.append_row(row.values);
        if (match.home_goals && match.away_goals) {
            ds.targets.push_back(make_targets(match));
        } else {
            ds.targets.push_back(std::nullopt);
        }
    }
    return ds;
}

ImputationTable fit_imputation(const Dataset& train) {
    ImputationTable table;
    table.names = train.feature_names;
    table.medians.resize(table.names.size(), kNaN);
    for (std::size_t c = 0; c < table.names.size(); ++c) {
        std::vector<double> seen;
        for (std::size_t r = 0; r < train.features.rows(); ++r) {
            const double v = train.features.at(r, c);
            if (!std::isnan(v)) seen.push_back(v);
        }
        if (seen.empty()) continue; // stays NaN: nothing to impute from
        std::sort(seen.begin(), seen.end());
        const std::size_t n = seen.size();
        table.medians[c] = n % 2 == 1 ? seen[n / 2] : (seen[n / 2 - 1] + seen[n / 2]) / 2.0;
    }
    return table;
}

int apply_imputation(Dataset& dataset, const ImputationTable& table) {
    if (table.names != dataset.feature_names) {
        throw Error(ErrorCode::dimension_mismatch,
                    "imputation table does not match the dataset's feature columns");
    }
    int filled = 0;
    for (std::size_t r = 0; r < dataset.features.rows(); ++r) {
        for (std::size_t c = 0; c < dataset.features.cols(); ++c) {
            if (!std::isnan(dataset.features.at(r, c))) continue;
            if (std::isnan(table.medians[c])) {
                throw Error(ErrorCode::degenerate_sample,
                            "cannot impute feature '" + table.names[c] +
                                "': no training split value was ever computed for it");
            }
            dataset.features.at(r, c) = table.medians[c];
            ++filled;
        }
    }
    return filled;
}

void write_dataset(const std::string& path, const Dataset& dataset) {
    CsvTable table;
    table.header.push_back("match_id");
    table.header.insert(table.header.end(), dataset.feature_names.begin(),
                        dataset.feature_names.end());
    table.header.insert(table.header.end(), {"home_goals", "away_goals", "outcome"});
    for (std::size_t r = 0; r < dataset.features.rows(); ++r) {
        std::vector<std::string> row;
        row.push_back(dataset.match_ids[r]);
        for (double v : dataset.features.row(r)) {
            if (std::isnan(v)) {
                throw Error(ErrorCode::invariant_violation,
                            "dataset row '" + dataset.match_ids[r] +
                                "' still has unimputed values; apply_imputation first");
            }
            row.push_back(format_double(v));
        }
        if (dataset.targets[r]) {
            row.push_back(std::to_string(dataset.targets[r]->home_goals));
            row.push_back(std::to_string(dataset.targets[r]->away_goals));
            row.push_back(std::string(outcome_name(dataset.targets[r]->outcome)));
        } else {
            row.insert(row.end(), {"", "", ""});
        }
        table.rows.push_back(std::move(row));
    }
    write_csv(path, table);
}

Dataset read_dataset(const std::string& path) {
    const CsvTable table = read_csv(path);
    if (table.header.size() < 5 || table.header.front() != "match_id" ||
        table.header[table.header.size() - 3] != "home_goals" ||
        table.header[table.header.size() - 2] != "away_goals" ||
        table.header.back() != "outcome") {
        throw Error(ErrorCode::malformed_row, path + ": not a feature dataset file");
    }
    Dataset ds;
    ds.feature_names.assign(table.header.begin() + 1, table.header.end() - 3);
    const auto expected_classical = feature_names(false);
    const auto expected_sel = feature_names(true);
    if (ds.feature_names != expected_classical && ds.feature_names != expected_sel) {
        throw Error(ErrorCode::malformed_row,
                    path + ": feature columns do not match the documented order");
    }
    const std::size_t n_features = ds.feature_names.size();
    ds.features = Matrix(0, n_features);
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        const int line = table.line_numbers[i];
        ds.match_ids.push_back(row[0]);
        std::vector<double> values;
        values.reserve(n_features);
        for (std::size_t c = 0; c < n_features; ++c) {
            values.push_back(parse_double(row[1 + c], line, ds.feature_names[c]));
        }
        ds.features.append_row(values);
        const std::string& hg = row[n_features + 1];
        const std::string& ag = row[n_features + 2];
        const std::string& oc = row[n_features + 3];
        if (hg.empty() && ag.empty() && oc.empty()) {
            ds.targets.push_back(std::nullopt);
        } else {
            TargetPair t;
            t.home_goals = static_cast<int>(parse_int(hg, line, "home_goals"));
            t.away_goals = static_cast<int>(parse_int(ag, line, "away_goals"));
            t.outcome = parse_outcome(oc);
            const TargetPair check = t;
            const Outcome derived = t.home_goals > t.away_goals   ? Outcome::HomeWin
                                    : t.home_goals < t.away_goals ? Outcome::AwayWin
                                                                  : Outcome::Draw;
            if (derived != check.outcome) {
                throw Error(ErrorCode::invariant_violation,
                            "line " + std::to_string(line) +
                                ": outcome label contradicts the goal counts");
            }
            ds.targets.push_back(t);
        }
    }
    return ds;
}

} // namespace handsel
