#include "sva/cli.hpp"

#include <algorithm>
#include <atomic>
#include <csignal>
#include <filesystem>
#include <iostream>
#include <regex>

#include <CLI11.hpp>

#include "sva/common.hpp"
#include "sva/eval.hpp"
#include "sva/exploration.hpp"
#include "sva/route_preview.hpp"
#include "sva/text.hpp"

namespace sva::cli {

namespace fs = std::filesystem;

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop.store(true); }

std::optional<GeoCoordinate> parse_coordinate(const std::string& s) {
    static const std::regex re(R"(^\s*(-?\d+(?:\.\d+)?)\s*,\s*(-?\d+(?:\.\d+)?)\s*$)");
    std::smatch m;
    if (!std::regex_match(s, m, re)) return std::nullopt;
    return geo::make_coordinate(std::stod(m[1].str()), std::stod(m[2].str()));
}

json location_json(const std::string& s) {
    if (const auto c = parse_coordinate(s)) return json{{"lat", c->lat}, {"lon", c->lon}};
    return s;
}

std::vector<std::string> split_list(const std::string& line) {
    std::vector<std::string> out;
    for (const auto& part : text::split(line, ',')) {
        auto t = text::trim(part);
        if (!t.empty()) out.push_back(std::move(t));
    }
    return out;
}

std::string join(const std::vector<std::string>& v, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
    return out;
}

const std::string& pick_verbosity(const prompts::DescriptionTriple& t, const std::string& v) {
    if (v == "short") return t.short_text;
    if (v == "long") return t.long_text;
    return t.medium_text;
}

struct Globals {
    std::string config_path;
};

service::ServiceConfig resolve_config(const Globals& g, const service::EnvLookup& env) {
    std::optional<std::string> path;
    if (!g.config_path.empty()) path = g.config_path;
    return service::load_config(path, env);
}

int cmd_preview(const service::ServiceConfig& cfg, const std::string& from, const std::string& to,
                const std::string& name, const std::string& question, const std::string& format, const std::string& id,
                const std::string& log_path, std::ostream& out) {
    json req{{"origin", location_json(from)}, {"destination", location_json(to)}};
    if (!name.empty()) req["destination_name"] = name;
    if (!question.empty()) req["question"] = question;
    preview::RoutePreviewer previewer(service::make_providers(cfg), cfg.preview_config(), service::make_clock(cfg));
    const auto result = previewer.generate(preview::request_from_json(req), id);
    const auto doc = preview::to_json(result);
    if (!log_path.empty()) write_file_atomic(log_path, doc.dump(2) + "\n");
    if (format == "json") {
        out << doc.dump(2) << "\n";
    } else {
        out << preview::to_markdown(result);
    }
    return kOk;
}

void print_block(std::ostream& out, const explore::Session& s, std::size_t from_event, const std::string& verbosity) {
    for (std::size_t i = from_event; i < s.history.size(); ++i) {
        const auto& ev = s.history[i];
        if (const auto* b = std::get_if<explore::BlockDescribed>(&ev)) {
            out << "\n[" << b->pano << ", heading " << geo::to_string(geo::cardinal_of(b->heading)) << "]\n"
                << pick_verbosity(b->triple, verbosity) << "\n";
        } else if (const auto* f = std::get_if<explore::BlockFailed>(&ev)) {
            out << "\n[" << f->pano << "] No description is available for this block (" << f->error << ").\n";
        } else if (std::holds_alternative<explore::DeadEnd>(ev)) {
            out << "\nThe street ends here.\n";
        } else if (const auto* e = std::get_if<explore::Ended>(&ev)) {
            out << "\nSession ended (" << e->reason << ").\n";
        }
    }
}

int cmd_explore(const service::ServiceConfig& cfg, const std::string& intent, const std::string& at,
                const std::string& verbosity, const std::string& id, const std::string& log_path, std::istream& in,
                std::ostream& out) {
    const auto start = parse_coordinate(at);
    if (!start) fail(ErrorCode::InvalidArgument, "--at must be \"lat,lon\"", at);
    explore::Explorer ex(service::make_providers(cfg), cfg.explore_config(), service::make_clock(cfg));
    auto s = ex.start_session(id, intent, *start);
    auto save = [&] {
        if (!log_path.empty()) write_file_atomic(log_path, explore::to_json(s).dump(2) + "\n");
    };

    out << "Status: starting at " << s.pano << ", facing " << geo::to_string(geo::cardinal_of(s.heading)) << "\n";
    if (!s.place_type.empty()) out << "Place type: " << s.place_type << "\n";
    out << "Description keywords: " << (s.keywords.empty() ? std::string("None") : join(s.keywords, ", ")) << "\n";
    out << "Add keywords (comma-separated), or press Enter to continue:\n> " << std::flush;
    std::string line;
    if (!std::getline(in, line) || text::trim(line) == "q") {
        ex.end_session(s, "user");
        save();
        out << "\nSession ended (user).\n";
        return kOk;
    }
    ex.add_keywords(s, split_list(line));
    if (!text::trim(line).empty()) out << "Description keywords: " << join(s.keywords, ", ") << "\n";

    while (s.status != explore::Status::Ended) {
        const auto mark = s.history.size();
        if (s.status == explore::Status::Walking) {
            ex.describe_block(s);
            ex.step_forward(s);
            print_block(out, s, mark, verbosity);
            save();
            continue;
        }
        // At an intersection or dead end.
        const auto& options = ex.offer_directions(s);
        save();
        out << "\nWhich Direction Would You Like to Explore Next?\n";
        for (const auto& o : options) {
            out << "  " << o.idx << ") Head " << geo::to_string(o.cardinal) << " on " << o.street_name
                << (o.previously_traveled ? " (previously traveled)" : "") << (o.suggested ? " [suggested]" : "")
                << ". " << o.description << "\n";
        }
        for (auto it = s.history.rbegin(); it != s.history.rend(); ++it) {
            if (const auto* d = std::get_if<explore::DirectionsOffered>(&*it)) {
                if (d->suggested) out << "Suggestion: option " << *d->suggested << ". " << d->suggestion_reason << "\n";
                break;
            }
        }
        for (;;) {
            out << "Choose a number, or q to stop:\n> " << std::flush;
            if (!std::getline(in, line) || text::trim(line) == "q") {
                const auto before_end = s.history.size();
                ex.end_session(s, "user");
                print_block(out, s, before_end, verbosity);
                save();
                return kOk;
            }
            const auto choice = text::trim(line);
            const bool numeric = !choice.empty() && std::all_of(choice.begin(), choice.end(), ::isdigit) && choice.size() < 6;
            if (numeric) {
                const int idx = std::stoi(choice);
                if (idx >= 1 && idx <= static_cast<int>(options.size())) {
                    ex.choose_direction(s, idx);
                    out << "Moving to " << s.pano << ".\n";
                    save();
                    break;
                }
            }
            out << "Not a valid choice.\n";
        }
    }
    save();
    return kOk;
}

std::vector<json> read_logs(const std::vector<std::string>& paths) {
    std::vector<std::string> files;
    for (const auto& p : paths) {
        if (fs::is_directory(p)) {
            std::vector<std::string> inner;
            for (const auto& e : fs::directory_iterator(p)) {
                if (e.is_regular_file() && e.path().extension() == ".json") inner.push_back(e.path().string());
            }
            std::sort(inner.begin(), inner.end());
            files.insert(files.end(), inner.begin(), inner.end());
        } else {
            files.push_back(p);
        }
    }
    std::vector<json> docs;
    for (const auto& f : files) docs.push_back(read_json_file(f));
    return docs;
}

int cmd_eval_sample(const std::vector<std::string>& logs, double fraction, std::uint64_t seed,
                    const std::string& out_path, bool force, std::ostream& out) {
    const auto items = eval::collect_descriptions(read_logs(logs));
    const auto tasks = eval::sample_tasks(items, fraction, seed);
    if (!out_path.empty()) {
        if (fs::exists(out_path)) {
            if (!force) fail(ErrorCode::InvalidArgument, "output file exists (use --force to replace it)", out_path);
            fs::remove(out_path);
        }
        eval::AnnotationStore store(out_path);
        for (const auto& t : tasks) store.add_task(t);
    }
    json list = json::array();
    for (const auto& t : tasks) list.push_back(eval::to_json(t));
    out << json{{"schema", std::string(eval::kSchema)},
                {"fraction", fraction},
                {"seed", seed},
                {"descriptions", items.size()},
                {"count", tasks.size()},
                {"tasks", list}}
               .dump(2)
        << "\n";
    return kOk;
}

void print_error(std::ostream& err, const Error& e) { err << json{{"error", service::error_body(e)}}.dump() << "\n"; }

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err,
        const service::EnvLookup& env) {
    CLI::App app{"Street-view description agent: route previews, guided exploration, evaluation"};
    app.name("svagent");
    app.require_subcommand(1);
    Globals g;
    app.add_option("-c,--config", g.config_path, "JSON config file (SCENESCOUT_* variables override it)");

    auto* preview_cmd = app.add_subcommand("preview", "Describe a walking route segment by segment");
    std::string from, to, name, question, format = "markdown", preview_id = "preview", preview_log;
    preview_cmd->add_option("--from", from, "\"lat,lon\" or a place query")->required();
    preview_cmd->add_option("--to", to, "\"lat,lon\" or a place query")->required();
    preview_cmd->add_option("--name", name, "Destination name");
    preview_cmd->add_option("--question", question, "Question about the destination");
    preview_cmd->add_option("--format", format)->check(CLI::IsMember({"markdown", "json"}));
    preview_cmd->add_option("--id", preview_id, "Preview id");
    preview_cmd->add_option("--log", preview_log, "Also write the preview.v1 document here");

    auto* explore_cmd = app.add_subcommand("explore", "Interactive virtual exploration");
    std::string intent, at, verbosity = "medium", session_id = "cli-session", explore_log;
    explore_cmd->add_option("--intent", intent, "What you want to learn about the area")->required();
    explore_cmd->add_option("--at", at, "Start \"lat,lon\"")->required();
    explore_cmd->add_option("--verbosity", verbosity)->check(CLI::IsMember({"short", "medium", "long"}));
    explore_cmd->add_option("--id", session_id, "Session id");
    explore_cmd->add_option("--log", explore_log, "Write the exploration.v1 log here");

    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
    std::optional<std::string> host;
    std::optional<int> port;
    std::optional<std::string> data_dir;
    serve_cmd->add_option("--host", host);
    serve_cmd->add_option("--port", port);
    serve_cmd->add_option("--data-dir", data_dir);

    auto* eval_cmd = app.add_subcommand("eval", "Human evaluation tooling");
    eval_cmd->require_subcommand(1);
    auto* sample_cmd = eval_cmd->add_subcommand("sample", "Sample descriptions from usage logs into annotation tasks");
    std::vector<std::string> sample_logs;
    double fraction = 0.2;
    std::uint64_t seed = 0;
    std::string sample_out;
    bool force = false;
    sample_cmd->add_option("logs", sample_logs, "preview.v1 / exploration.v1 files or directories")->required();
    sample_cmd->add_option("--fraction", fraction, "Share of descriptions per mode")->check(CLI::Range(0.0, 1.0));
    sample_cmd->add_option("--seed", seed)->required();
    sample_cmd->add_option("-o,--out", sample_out, "Annotation file to create");
    sample_cmd->add_flag("--force", force, "Replace an existing annotation file");

    auto* annotate_cmd = eval_cmd->add_subcommand("annotate", "Annotate sampled tasks sentence by sentence");
    std::string annotate_file;
    annotate_cmd->add_option("file", annotate_file)->required();

    auto* report_cmd = eval_cmd->add_subcommand("report", "Aggregate annotations");
    std::string report_file, report_format = "markdown";
    report_cmd->add_option("file", report_file)->required();
    report_cmd->add_option("--format", report_format)->check(CLI::IsMember({"markdown", "json"}));

    auto* diff_cmd = eval_cmd->add_subcommand("diff", "Show disagreements between two annotators");
    std::string diff_a, diff_b;
    diff_cmd->add_option("a", diff_a)->required();
    diff_cmd->add_option("b", diff_b)->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*eval_cmd) {
            if (*sample_cmd) return cmd_eval_sample(sample_logs, fraction, seed, sample_out, force, out);
            if (*annotate_cmd) {
                auto store = eval::AnnotationStore::load(annotate_file);
                const auto n = eval::annotate(store, in, out);
                out << n << " records written to " << annotate_file << "\n";
                return kOk;
            }
            if (*report_cmd) {
                const auto report = eval::aggregate(eval::AnnotationStore::load(report_file));
                if (report_format == "json") out << eval::to_json(report).dump(2) << "\n";
                else out << eval::to_markdown(report);
                return kOk;
            }
            if (*diff_cmd) {
                const auto d = eval::diff(eval::AnnotationStore::load(diff_a), eval::AnnotationStore::load(diff_b));
                out << eval::to_json(d).dump(2) << "\n";
                return kOk;
            }
        }
        auto cfg = resolve_config(g, env);
        if (*preview_cmd) return cmd_preview(cfg, from, to, name, question, format, preview_id, preview_log, out);
        if (*explore_cmd) return cmd_explore(cfg, intent, at, verbosity, session_id, explore_log, in, out);
        if (*serve_cmd) {
            if (host) cfg.listen_host = *host;
            if (port) cfg.listen_port = *port;
            if (data_dir) cfg.data_dir = *data_dir;
            cfg.validate();
            service::Service svc(cfg);
            g_stop.store(false);
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            const bool ok = service::serve(svc, g_stop, [&](int p) {
                out << "svagent " << service::kVersion << " (" << cfg.provider_mode << ") listening on http://"
                    << cfg.listen_host << ":" << p << " with " << svc.recovered_sessions() << " recovered sessions"
                    << std::endl;
            });
            if (!ok) fail(ErrorCode::Config, "cannot listen on " + cfg.listen_host + ":" + std::to_string(cfg.listen_port));
            return kOk;
        }
    } catch (const Error& e) {
        print_error(err, e);
        return e.code() == ErrorCode::Config ? kUsage : kFailure;
    } catch (const std::exception& e) {
        print_error(err, Error(ErrorCode::Internal, e.what()));
        return kFailure;
    }
    return kFailure;
}

}  // namespace sva::cli
