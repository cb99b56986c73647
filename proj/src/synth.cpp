#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "handsel/cmp.hpp"
#include "handsel/records.hpp"
#include "handsel/rng.hpp"

namespace handsel {

namespace {

struct City {
    const char* name;
    const char* country;
    double lat, lon;
    int utc_offset_min;
};

// Venue pool; wraps with a numeric suffix and a small coordinate nudge when
// n_teams exceeds it.
constexpr City kCities[] = {
    {"Metz HB", "FRA", 49.1193, 6.1757, 60},
    {"Brest Bretagne", "FRA", 48.3904, -4.4861, 60},
    {"Paris 92", "FRA", 48.8566, 2.3522, 60},
    {"Nantes Atlantique", "FRA", 47.2184, -1.5536, 60},
    {"Bucuresti HC", "ROU", 44.4268, 26.1025, 120},
    {"Esbjerg Elite", "DNK", 55.4765, 8.4594, 60},
    {"Kobenhavn HK", "DNK", 55.6761, 12.5683, 60},
    {"Oslo HK", "NOR", 59.9139, 10.7522, 60},
    {"Kristiansand Vipers", "NOR", 58.1599, 8.0182, 60},
    {"Gyori KC", "HUN", 47.6875, 17.6504, 60},
    {"Debrecen VSC", "HUN", 47.5316, 21.6273, 60},
    {"Ljubljana Krim", "SVN", 46.0569, 14.5058, 60},
    {"Zagreb Lokomotiva", "HRV", 45.8150, 15.9819, 60},
    {"Bietigheim SG", "DEU", 48.9644, 9.1317, 60},
    {"Dortmund BVB", "DEU", 51.5136, 7.4653, 60},
    {"Porto Clube", "PRT", 41.1579, -8.6291, 0},
    {"Lisboa Benfica", "PRT", 38.7223, -9.1393, 0},
    {"Madrid Guadalajara", "ESP", 40.4168, -3.7038, 60},
    {"Wien Hypo", "AUT", 48.2082, 16.3738, 60},
    {"Plzen DHC", "CZE", 49.7384, 13.3736, 60},
};
constexpr int kCityCount = static_cast<int>(std::size(kCities));

struct SquadSlot {
    Position pos;
    double h_mean, h_sd; // cm
    double w_mean, w_sd; // kg
};

// 14-player squads: 4 wings, 6 backs, 2 pivots, 2 goalkeepers.
constexpr SquadSlot kSquad[] = {
    {Position::Wing, 168.0, 5.0, 63.0, 4.0},   {Position::Wing, 168.0, 5.0, 63.0, 4.0},
    {Position::Wing, 168.0, 5.0, 63.0, 4.0},   {Position::Wing, 168.0, 5.0, 63.0, 4.0},
    {Position::Back, 178.0, 5.0, 71.0, 5.0},   {Position::Back, 178.0, 5.0, 71.0, 5.0},
    {Position::Back, 178.0, 5.0, 71.0, 5.0},   {Position::Back, 178.0, 5.0, 71.0, 5.0},
    {Position::Back, 178.0, 5.0, 71.0, 5.0},   {Position::Back, 178.0, 5.0, 71.0, 5.0},
    {Position::Pivot, 182.0, 4.0, 79.0, 5.0},  {Position::Pivot, 182.0, 4.0, 79.0, 5.0},
    {Position::Goalkeeper, 177.0, 5.0, 73.0, 5.0},
    {Position::Goalkeeper, 177.0, 5.0, 73.0, 5.0},
};

constexpr int kFirstSeason = 2021;

double round1(double x) { return std::round(x * 10.0) / 10.0; }

std::string two_digits(int v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%02d", v);
    return buf;
}

// Circle-method double round robin: 2(n-1) rounds of n/2 games, every
// ordered pair hosted exactly once.
std::vector<std::vector<std::pair<int, int>>> double_round_robin(int n) {
    std::vector<int> arr(n);
    for (int i = 0; i < n; ++i) arr[i] = i;
    std::vector<std::vector<std::pair<int, int>>> first_leg;
    for (int r = 0; r < n - 1; ++r) {
        std::vector<std::pair<int, int>> round;
        for (int k = 0; k < n / 2; ++k) {
            const int a = arr[k];
            const int b = arr[n - 1 - k];
            if ((r + k) % 2 == 0) {
                round.emplace_back(a, b);
            } else {
                round.emplace_back(b, a);
            }
        }
        first_leg.push_back(std::move(round));
        // rotate everything but arr[0]
        arr.insert(arr.begin() + 1, arr.back());
        arr.pop_back();
    }
    auto rounds = first_leg;
    for (const auto& round : first_leg) {
        std::vector<std::pair<int, int>> mirrored;
        for (const auto& [h, a] : round) mirrored.emplace_back(a, h);
        rounds.push_back(std::move(mirrored));
    }
    return rounds;
}

void center(std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    for (double& x : v) x -= mean;
}

} // namespace

SynthData generate_synthetic(const SynthConfig& config) {
    config.validate();
    Rng rng(config.seed);
    SynthData out;
    const int n = config.n_teams;

    // --- teams, with their latent law (draw order: alpha, delta, nu) ---
    std::vector<double> alpha(n), delta(n), nu(n);
    for (int t = 0; t < n; ++t) {
        const City& city = kCities[t % kCityCount];
        const int wrap = t / kCityCount;
        TeamRecord team;
        team.team_id = "t" + two_digits(t + 1);
        team.name = wrap == 0 ? city.name : std::string(city.name) + " " + std::to_string(wrap + 1);
        team.club_country = city.country;
        team.home_lat = city.lat + 0.01 * wrap;
        team.home_lon = city.lon + 0.01 * wrap;
        team.utc_offset_min = city.utc_offset_min;
        out.teams.push_back(std::move(team));
        alpha[t] = rng.normal(0.0, config.strength_spread);
        // Defences separate teams less than attacks do (score variance in
        // handball is mostly an attacking phenomenon), so the defensive
        // latent gets a tighter spread.
        delta[t] = rng.normal(0.0, 0.6 * config.strength_spread);
        nu[t] = rng.uniform(config.noise_nu_range.first, config.noise_nu_range.second);
    }
    // Center the latent vectors: keeps the league-wide goal mean pinned to
    // base_mean_goals instead of drifting with the luck of the draw.
    center(alpha);
    center(delta);

    // --- players: season snapshots (draw order per player: height, weight,
    // age, locality, nationality index if foreign, international flag) ---
    for (int s = 0; s < config.n_seasons; ++s) {
        const int sy = kFirstSeason + s;
        const std::string season = std::to_string(sy) + "/" + std::to_string(sy + 1);
        for (int t = 0; t < n; ++t) {
            for (std::size_t k = 0; k < std::size(kSquad); ++k) {
                const SquadSlot& slot = kSquad[k];
                PlayerRecord p;
                p.player_id = "p_" + out.teams[t].team_id + "_" + std::to_string(sy) + "_" +
                              two_digits(static_cast<int>(k) + 1);
                p.team_id = out.teams[t].team_id;
                p.season = season;
                p.position = slot.pos;
                p.height_cm = round1(std::clamp(rng.normal(slot.h_mean, slot.h_sd), 150.0, 215.0));
                p.weight_kg = round1(std::clamp(rng.normal(slot.w_mean, slot.w_sd), 45.0, 130.0));
                const double age_years = rng.uniform(18.0, 36.0);
                p.birth_date = civil_from_days(days_from_civil({sy, 7, 1}) -
                                               std::llround(age_years * 365.2425));
                if (rng.u01() < 0.6) {
                    p.nationality = out.teams[t].club_country;
                } else {
                    p.nationality = kCities[rng.uniform_int(kCityCount)].country;
                }
                p.is_international = rng.u01() < 0.35;
                out.players.push_back(std::move(p));
            }
        }
    }

    // --- fixtures, chronological (draw order per game: home goals, away) ---
    const double log_base = std::log(config.base_mean_goals);
    for (int s = 0; s < config.n_seasons; ++s) {
        const int sy = kFirstSeason + s;
        std::vector<std::vector<std::pair<int, int>>> rounds;
        for (int rep = 0; rep < config.rounds_per_season; ++rep) {
            for (auto& round : double_round_robin(n)) rounds.push_back(std::move(round));
        }
        const std::int64_t day0 = days_from_civil({sy, 9, 5});
        const std::int64_t day1 = days_from_civil({sy + 1, 6, 5});
        const int n_rounds = static_cast<int>(rounds.size());
        const Date final_date = civil_from_days(day1);
        for (int r = 0; r < n_rounds; ++r) {
            const Date date = civil_from_days(
                day0 + std::llround(static_cast<double>(r) * static_cast<double>(day1 - day0) /
                                    (n_rounds - 1)));
            for (std::size_t g = 0; g < rounds[r].size(); ++g) {
                const auto [hi, ai] = rounds[r][g];
                MatchRecord m;
                m.match_id = "s" + std::to_string(sy) + "r" + two_digits(r + 1) + "g" +
                             std::to_string(static_cast<int>(g) + 1);
                const int local_hour = 14 + static_cast<int>(g) % 7;
                m.start_time.seconds = midnight_utc(date).seconds + local_hour * 3600 -
                                       out.teams[hi].utc_offset_min * 60;
                m.competition_id = "SYNTH_L1";
                m.importance = 2;
                m.season_final_date = final_date;
                m.home_team_id = out.teams[hi].team_id;
                m.away_team_id = out.teams[ai].team_id;
                m.venue_lat = out.teams[hi].home_lat;
                m.venue_lon = out.teams[hi].home_lon;
                const double mean_home =
                    std::exp(log_base + alpha[hi] - delta[ai] + config.home_advantage);
                const double mean_away = std::exp(log_base + alpha[ai] - delta[hi]);
                // lambda = mean^nu: first-order inversion of the CMP mean
                m.home_goals = sample_cmp({std::pow(mean_home, nu[hi]), nu[hi]}, rng);
                m.away_goals = sample_cmp({std::pow(mean_away, nu[ai]), nu[ai]}, rng);
                out.matches.push_back(std::move(m));
            }
        }
    }
    return out;
}

} // namespace handsel
