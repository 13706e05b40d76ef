#pragma once

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "paveval/scoring.hpp"
#include "paveval/submission.hpp"

namespace paveval {

struct Team {
    std::string team_id;
    std::string display_name;
    std::string token;
};

// Teams file: JSON array of {team_id, display_name, token}.
inline std::vector<Team> parse_teams(std::string_view json_text) {
    const nlohmann::json doc = detail::parse_json_document(json_text);
    if (!doc.is_array()) throw ParseError("teams file: expected a top-level array");
    std::vector<Team> teams;
    std::map<std::string, bool> seen_id, seen_token;
    for (size_t i = 0; i < doc.size(); ++i) {
        const auto& e = doc[i];
        const std::string path = "$[" + std::to_string(i) + "]";
        for (const char* field : {"team_id", "display_name", "token"}) {
            if (!e.contains(field) || !e[field].is_string()) {
                throw ParseError(path + "." + field + ": expected a string");
            }
        }
        Team t{e["team_id"].get<std::string>(), e["display_name"].get<std::string>(),
               e["token"].get<std::string>()};
        if (seen_id[t.team_id]) throw ValidationError("duplicate team_id '" + t.team_id + "'");
        if (seen_token[t.token]) throw ValidationError("duplicate token for '" + t.team_id + "'");
        seen_id[t.team_id] = seen_token[t.token] = true;
        teams.push_back(std::move(t));
    }
    return teams;
}

struct SubmissionRecord {
    std::int64_t submission_id = 0;
    std::string team_id;
    std::string received_at;  // UTC, ISO 8601
    double mean_f1 = 0.0;
    std::map<std::string, double> per_class_f1;
};

struct LeaderboardEntry {
    int rank = 0;
    std::string team;  // display name
    double best_mean_f1 = 0.0;
};

struct SubmitOutcome {
    std::int64_t submission_id = 0;
    double mean_f1 = 0.0;
    std::map<std::string, double> per_class_f1;
    int rank = 0;
};

// Thrown by service operations; attach() turns it into the HTTP status.
struct ApiError : std::runtime_error {
    int status;
    ApiError(int s, const std::string& msg) : std::runtime_error(msg), status(s) {}
};

namespace detail {

inline std::string utc_now_iso8601() {
    const std::time_t now = std::chrono::system_clock::to_time_t(
        std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace detail

// The online evaluation platform: token-authenticated submissions scored
// synchronously against the hidden ground truth, an append-only submission
// log (one JSON document per line) with verbatim bodies stored beside it,
// and a leaderboard recomputed from the log on startup. Replaying the log
// reproduces the leaderboard exactly.
class EvalService {
public:
    EvalService(std::optional<Dataset> ground_truth, std::vector<Team> teams,
                std::filesystem::path data_dir)
        : ground_truth_(std::move(ground_truth)), teams_(std::move(teams)),
          data_dir_(std::move(data_dir)) {
        std::error_code ec;
        std::filesystem::create_directories(data_dir_ / "bodies", ec);
        if (ec) throw IoError("cannot create data directory " + data_dir_.string());
        replay_log();
    }

    // Scores and records one submission. Throws ApiError with the HTTP status
    // a remote caller would see.
    SubmitOutcome submit(const std::string& token, const std::string& body) {
        const Team* team = team_by_token(token);
        if (!team) throw ApiError(401, "unknown token");
        if (!ground_truth_) throw ApiError(503, "ground truth not loaded");

        DetectionMap predictions;
        try {
            predictions = parse_submission(body);
        } catch (const std::exception& e) {
            throw ApiError(400, e.what());
        }
        std::string unknown;
        for (const auto& [image_id, dets] : predictions) {
            if (!ground_truth_->contains(image_id)) {
                unknown += unknown.empty() ? image_id : ", " + image_id;
            }
        }
        if (!unknown.empty()) throw ApiError(422, "unknown image_ids: " + unknown);

        const EvalReport report = evaluate(*ground_truth_, predictions, 0.5);
        std::map<std::string, double> per_class;
        for (DistressClass c : report.classes_evaluated) {
            per_class[std::string(class_name(c))] = report.per_class[static_cast<int>(c)].f1;
        }
        return record(*team, report.mean_f1, per_class, &body);
    }

    // Import seam: records a pre-scored result through the same persistence
    // path as submit (no body, no scoring).
    SubmitOutcome inject_score(const std::string& team_id, double mean_f1,
                               const std::map<std::string, double>& per_class_f1) {
        const Team* team = team_by_id(team_id);
        if (!team) throw ApiError(404, "unknown team_id '" + team_id + "'");
        return record(*team, mean_f1, per_class_f1, nullptr);
    }

    // Best score per team, descending; ties go to the team that reached the
    // score first. Teams without submissions are omitted.
    std::vector<LeaderboardEntry> leaderboard() const {
        std::shared_lock lock(mutex_);
        return leaderboard_locked();
    }

    std::vector<SubmissionRecord> history(const std::string& team_id) const {
        if (!team_by_id(team_id)) throw ApiError(404, "unknown team_id '" + team_id + "'");
        std::shared_lock lock(mutex_);
        auto it = history_.find(team_id);
        return it == history_.end() ? std::vector<SubmissionRecord>{} : it->second;
    }

    // Wires the REST routes onto an httplib server. The token is carried in
    // the Authorization header, either bare or as "Bearer <token>".
    void attach(httplib::Server& server) {
        server.Post("/api/v1/submissions",
                    [this](const httplib::Request& req, httplib::Response& res) {
                        try {
                            std::string token = req.get_header_value("Authorization");
                            if (token.rfind("Bearer ", 0) == 0) token = token.substr(7);
                            const SubmitOutcome outcome = submit(token, req.body);
                            nlohmann::json out{
                                {"submission_id", outcome.submission_id},
                                {"mean_f1", outcome.mean_f1},
                                {"per_class_f1", outcome.per_class_f1},
                                {"rank", outcome.rank},
                            };
                            res.set_content(out.dump(), "application/json");
                        } catch (const ApiError& e) {
                            fail(res, e.status, e.what());
                        }
                    });
        server.Get("/api/v1/leaderboard",
                   [this](const httplib::Request&, httplib::Response& res) {
                       nlohmann::json out = nlohmann::json::array();
                       for (const auto& entry : leaderboard()) {
                           out.push_back({{"rank", entry.rank},
                                          {"team", entry.team},
                                          {"best_mean_f1", entry.best_mean_f1}});
                       }
                       res.set_content(out.dump(), "application/json");
                   });
        server.Get(R"(/api/v1/teams/([^/]+)/submissions)",
                   [this](const httplib::Request& req, httplib::Response& res) {
                       try {
                           nlohmann::json out = nlohmann::json::array();
                           for (const auto& rec : history(req.matches[1])) {
                               out.push_back({{"submission_id", rec.submission_id},
                                              {"received_at", rec.received_at},
                                              {"mean_f1", rec.mean_f1},
                                              {"per_class_f1", rec.per_class_f1}});
                           }
                           res.set_content(out.dump(), "application/json");
                       } catch (const ApiError& e) {
                           fail(res, e.status, e.what());
                       }
                   });
    }

private:
    static void fail(httplib::Response& res, int status, const std::string& message) {
        res.status = status;
        res.set_content(nlohmann::json{{"error", message}}.dump(), "application/json");
    }

    const Team* team_by_token(const std::string& token) const {
        for (const auto& t : teams_) {
            if (t.token == token) return &t;
        }
        return nullptr;
    }

    const Team* team_by_id(const std::string& team_id) const {
        for (const auto& t : teams_) {
            if (t.team_id == team_id) return &t;
        }
        return nullptr;
    }

    std::filesystem::path log_path() const { return data_dir_ / "submissions.log"; }

    // Persist (log line + verbatim body) and update the leaderboard under one
    // lock, so the record is durable before the response and concurrent
    // submissions serialize into a well-defined arrival order.
    SubmitOutcome record(const Team& team, double mean_f1,
                         const std::map<std::string, double>& per_class_f1,
                         const std::string* body) {
        std::unique_lock lock(mutex_);
        SubmissionRecord rec;
        rec.submission_id = next_submission_id_++;
        rec.team_id = team.team_id;
        rec.received_at = detail::utc_now_iso8601();
        rec.mean_f1 = mean_f1;
        rec.per_class_f1 = per_class_f1;

        nlohmann::json line{
            {"submission_id", rec.submission_id},
            {"team_id", rec.team_id},
            {"received_at", rec.received_at},
            {"mean_f1", rec.mean_f1},
            {"per_class_f1", rec.per_class_f1},
        };
        if (body) {
            const std::string hash = detail::fnv1a_hex(*body);
            line["body_hash"] = hash;
            std::ofstream body_file(data_dir_ / "bodies" / (hash + ".json"),
                                    std::ios::binary | std::ios::trunc);
            if (!body_file) throw IoError("cannot write submission body");
            body_file << *body;
        }
        std::ofstream log(log_path(), std::ios::app | std::ios::binary);
        if (!log) throw IoError("cannot append to " + log_path().string());
        log << line.dump() << '\n';
        log.flush();
        if (!log) throw IoError("failed writing " + log_path().string());

        apply_locked(rec);

        SubmitOutcome outcome;
        outcome.submission_id = rec.submission_id;
        outcome.mean_f1 = rec.mean_f1;
        outcome.per_class_f1 = rec.per_class_f1;
        const auto rows = board_rows_locked();
        for (size_t i = 0; i < rows.size(); ++i) {
            if (rows[i]->team_id == team.team_id) {
                outcome.rank = static_cast<int>(i) + 1;
                break;
            }
        }
        return outcome;
    }

    void apply_locked(const SubmissionRecord& rec) {
        history_[rec.team_id].push_back(rec);
        auto it = best_.find(rec.team_id);
        if (it == best_.end() || rec.mean_f1 > it->second.first) {
            best_[rec.team_id] = {rec.mean_f1, rec.submission_id};
        }
    }

    std::vector<LeaderboardEntry> leaderboard_locked() const {
        struct Row {
            const Team* team;
            double best;
            std::int64_t first_achieved;
        };
        std::vector<Row> rows;
        for (const auto& t : teams_) {
            auto it = best_.find(t.team_id);
            if (it == best_.end()) continue;
            rows.push_back({&t, it->second.first, it->second.second});
        }
        std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
            if (a.best != b.best) return a.best > b.best;
            return a.first_achieved < b.first_achieved;
        });
        std::vector<LeaderboardEntry> out;
        for (size_t i = 0; i < rows.size(); ++i) {
            out.push_back({static_cast<int>(i) + 1, rows[i].team->display_name,
                           rows[i].best});
        }
        return out;
    }

    void replay_log() {
        std::ifstream in(log_path(), std::ios::binary);
        if (!in) return;  // fresh data dir
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
            } catch (const nlohmann::json::parse_error&) {
                throw ParseError(log_path().string() + ":" + std::to_string(line_no) +
                                 ": corrupt log line");
            }
            SubmissionRecord rec;
            rec.submission_id = j.at("submission_id").get<std::int64_t>();
            rec.team_id = j.at("team_id").get<std::string>();
            rec.received_at = j.value("received_at", std::string());
            rec.mean_f1 = j.at("mean_f1").get<double>();
            if (j.contains("per_class_f1")) {
                for (const auto& [k, v] : j["per_class_f1"].items()) {
                    rec.per_class_f1[k] = v.get<double>();
                }
            }
            apply_locked(rec);
            next_submission_id_ = std::max(next_submission_id_, rec.submission_id + 1);
        }
    }

    std::optional<Dataset> ground_truth_;
    std::vector<Team> teams_;
    std::filesystem::path data_dir_;

    mutable std::shared_mutex mutex_;
    std::map<std::string, std::vector<SubmissionRecord>> history_;
    std::map<std::string, std::pair<double, std::int64_t>> best_;  // team -> (score, sub id)
    std::int64_t next_submission_id_ = 1;
};

}  // namespace paveval
