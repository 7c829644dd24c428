// SPDX-FileCopyrightText: © 2026 The setanon Authors
//
// SPDX-License-Identifier: Apache-2.0

// setanon: k-anonymity for set-valued records and query logs.
//
// Exit codes: 0 success, 1 verification failure, 2 usage or input error.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "setanon/setanon.hpp"

namespace {

using namespace setanon;
using Json = nlohmann::ordered_json;

constexpr int kVerifyFailed = 1;
constexpr int kUsage = 2;

struct Options {
    std::string input;
    std::string output;
    std::string report;
    std::string format = "auto";
    std::size_t k = 2;
    std::string algorithm = "greedy";
    std::uint64_t seed = kDefaultSeed;
    std::size_t p = 3;
    std::size_t keyword_p = 2;
    double edit_threshold = ThreaderParams{}.edit_threshold;
    double jaccard_threshold = ThreaderParams{}.jaccard_threshold;
    bool distinct_users = true;
    std::size_t threads = 1;
    std::string k_list = "2,3,5,10";
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Writes to the named file, or stdout when the name is empty or "-".
class Sink {
public:
    explicit Sink(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) throw UsageError("cannot write " + path);
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

void write_report(const std::string& path, const Json& j) {
    if (path.empty()) return;
    Sink sink(path);
    sink.stream() << j.dump(2) << '\n';
}

// A query log has at least three tab-separated fields with a timestamp in
// the third, or starts with the AnonID header. Anything else is set data.
bool looks_like_log(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::string_view v = detail::trim(line);
        if (v.empty() || v.front() == '#') continue;
        const auto fields = detail::split_tabs(line);
        if (!fields.empty() && detail::trim(fields[0]) == "AnonID") return true;
        return fields.size() >= 3 && parse_timestamp(fields[2]).has_value();
    }
    return false;
}

bool is_log(const Options& o, const std::string& text) {
    if (o.format == "log") return true;
    if (o.format == "set") return false;
    return looks_like_log(text);
}

PipelineConfig pipeline_config(const Options& o) {
    PipelineConfig cfg;
    cfg.k = o.k;
    cfg.algorithm = *parse_algorithm(o.algorithm);
    cfg.seed = o.seed;
    cfg.p = o.p;
    cfg.keyword_p = o.keyword_p;
    cfg.threader.edit_threshold = o.edit_threshold;
    cfg.threader.jaccard_threshold = o.jaccard_threshold;
    cfg.enforce_distinct_users = o.distinct_users;
    cfg.workers = o.threads;
    return cfg;
}

Json flags_json(const std::string& command, const Options& o) {
    Json f;
    f["command"] = command;
    f["input"] = o.input;
    f["format"] = o.format;
    f["k"] = o.k;
    f["algorithm"] = o.algorithm;
    f["seed"] = o.seed;
    f["p"] = o.p;
    f["keyword_p"] = o.keyword_p;
    f["edit_threshold"] = o.edit_threshold;
    f["jaccard_threshold"] = o.jaccard_threshold;
    f["distinct_users"] = o.distinct_users;
    f["threads"] = o.threads;
    if (command == "sweep") f["k_list"] = o.k_list;
    return f;
}

Json report_json(const PipelineReport& r) {
    Json j;
    j["k"] = r.k;
    j["rows_read"] = r.rows_read;
    j["rows_skipped"] = r.rows_skipped;
    j["sessions"] = r.sessions;
    j["queries_in"] = r.queries_in;
    j["threads_total"] = r.threads_total;
    j["clusters_total"] = r.clusters_total;
    j["clusters_undersized"] = r.clusters_undersized;
    j["largest_cluster"] = r.largest_cluster;
    j["threads_deleted"] = r.threads_deleted;
    j["deleted_thread_keywords"] = r.deleted_thread_keywords;
    j["additions"] = r.additions;
    j["deletions"] = r.deletions;
    j["threads_emptied"] = r.threads_emptied;
    j["threads_out"] = r.threads_out;
    j["queries_out"] = r.queries_out;
    j["user_merges"] = r.user_merges;
    j["oracle_fallbacks"] = r.oracle_fallbacks;
    j["total_cost"] = r.total_cost();
    return j;
}

QueryLog parse_log_text(const std::string& text) {
    std::istringstream in(text);
    return read_query_log(in);
}

std::vector<std::size_t> parse_k_list(const std::string& s) {
    std::vector<std::size_t> ks;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t k = 0;
        if (!detail::parse_int(detail::trim(item), k)) throw UsageError("bad --k-list entry '" + item + "'");
        ks.push_back(k);
    }
    return ks;
}

Json grouping_json(const Dataset& d, const Grouping& g) {
    Json blocks = Json::array();
    for (const auto& b : g.blocks) {
        Json ids = Json::array();
        for (std::size_t i : b) ids.push_back(d[i].id);
        blocks.push_back(ids);
    }
    return blocks;
}

// ---- subcommands ----

int cmd_segment(const Options& o) {
    const auto log = parse_log_text(read_file(o.input));
    ThreaderParams params;
    params.edit_threshold = o.edit_threshold;
    params.jaccard_threshold = o.jaccard_threshold;
    const auto threads = segment_log(log, params, o.seed);
    Sink out(o.output);
    for (const auto& t : threads) {
        for (const auto& q : t.queries) {
            out.stream() << format_thread_id(t.thread_id) << '\t' << q.raw_query << '\t' << q.time_text << '\n';
        }
    }
    Json rep;
    rep["flags"] = flags_json("segment", o);
    rep["sessions"] = log.sessions.size();
    rep["rows_read"] = log.rows_read;
    rep["rows_skipped"] = log.rows_skipped;
    rep["threads"] = threads.size();
    write_report(o.report, rep);
    return 0;
}

int cmd_cluster(const Options& o) {
    // Threads file: thread_id<TAB>query<TAB>timestamp, as written by segment.
    std::istringstream in(read_file(o.input));
    std::vector<std::string> order;
    std::map<std::string, std::set<std::string>> keywords;
    std::string line;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        const auto f = detail::split_tabs(line);
        if (f.size() < 2) throw UsageError("threads file line needs thread_id and query: " + line);
        const std::string id(detail::trim(f[0]));
        auto [it, fresh] = keywords.try_emplace(id);
        if (fresh) order.push_back(id);
        for (auto& w : normalize(f[1])) it->second.insert(std::move(w));
    }
    const auto mh = MinHashConfig::make(o.seed, o.p, o.keyword_p);
    std::vector<std::vector<std::uint64_t>> sets;
    std::vector<std::size_t> nonempty;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& ks = keywords[order[i]];
        if (ks.empty()) continue;
        sets.push_back(keyword_hash_set({ks.begin(), ks.end()}, mh));
        nonempty.push_back(i);
    }
    const auto clusters = cluster_by_lsh(sets, mh);
    Sink out(o.output);
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        for (std::size_t member : clusters[c]) {
            const auto& id = order[nonempty[member]];
            std::string words;
            for (const auto& w : keywords[id]) words += (words.empty() ? "" : " ") + w;
            out.stream() << c << '\t' << id << '\t' << words << '\n';
        }
    }
    Json rep;
    rep["flags"] = flags_json("cluster", o);
    rep["threads"] = sets.size();
    rep["clusters"] = clusters.size();
    write_report(o.report, rep);
    return 0;
}

int anonymize_set(const Options& o, const std::string& text) {
    std::istringstream in(text);
    const SetData data = read_set_data(in);
    const Dataset& d = data.dataset;
    AnonymizationResult result;
    const Algorithm algo = *parse_algorithm(o.algorithm);
    if (algo == Algorithm::Greedy) {
        result = greedy_flip_anonymize(d, o.k);
    } else if (algo == Algorithm::Cluster) {
        result = cluster_anonymize(d, o.k, o.seed);
    } else {
        auto opt = optimal_flip(d, o.k);
        auto script = anonymize_grouping(d, opt.grouping);
        result = make_result(d, std::move(opt.grouping), std::move(script));
    }
    if (!is_k_anonymous(result.output, o.k)) throw VerificationError("anonymized records are not k-anonymous");
    Sink out(o.output);
    write_set_data(out.stream(), result.output, data.items);

    Json rep;
    rep["flags"] = flags_json("anonymize", o);
    rep["records"] = d.size();
    rep["cost"] = result.cost();
    rep["additions"] = result.script.additions();
    rep["deletions"] = result.script.deletions();
    rep["empty_records"] = result.empty_records.size();
    rep["grouping"] = grouping_json(d, result.grouping);
    write_report(o.report, rep);
    return 0;
}

int cmd_anonymize(const Options& o) {
    const std::string text = read_file(o.input);
    if (!is_log(o, text)) return anonymize_set(o, text);
    const auto result = run(parse_log_text(text), pipeline_config(o));
    Sink out(o.output);
    write_output(out.stream(), result.rows);
    Json rep;
    rep["flags"] = flags_json("anonymize", o);
    rep["report"] = report_json(result.report);
    write_report(o.report, rep);
    return 0;
}

int cmd_sweep(const Options& o) {
    const auto rows = sweep(parse_log_text(read_file(o.input)), pipeline_config(o), parse_k_list(o.k_list));
    Sink out(o.output);
    out.stream() << "k,additions,deletions,threads_deleted,deleted_thread_keywords,total_cost\n";
    Json list = Json::array();
    for (const auto& r : rows) {
        out.stream() << r.k << ',' << r.additions << ',' << r.deletions << ',' << r.threads_deleted << ','
                     << r.deleted_thread_keywords << ',' << r.total_cost() << '\n';
        list.push_back(report_json(r));
    }
    Json rep;
    rep["flags"] = flags_json("sweep", o);
    rep["rows"] = list;
    write_report(o.report, rep);
    return 0;
}

int cmd_oracle(const Options& o) {
    std::istringstream in(read_file(o.input));
    const SetData data = read_set_data(in, true);
    const auto opt = optimal_flip(data.dataset, o.k);
    Sink out(o.output);
    out.stream() << "cost " << opt.cost << '\n';
    for (const auto& b : opt.grouping.blocks) {
        out.stream() << "block";
        for (std::size_t i : b) out.stream() << ' ' << data.dataset[i].id;
        out.stream() << '\n';
    }
    Json rep;
    rep["flags"] = flags_json("oracle", o);
    rep["cost"] = opt.cost;
    rep["grouping"] = grouping_json(data.dataset, opt.grouping);
    write_report(o.report, rep);
    return 0;
}

int cmd_verify(const Options& o) {
    const std::string text = read_file(o.input);
    bool ok = false;
    std::string detail;
    if (is_log(o, text)) {
        std::istringstream in(text);
        const auto bad = find_violations(read_output(in), o.k, MinHashConfig::make(o.seed, o.p, o.keyword_p));
        ok = bad.empty();
        detail = std::to_string(bad.size()) + " threads lack support";
    } else {
        std::istringstream in(text);
        ok = is_k_anonymous(read_set_data(in, true).dataset, o.k);
        detail = "some record set occurs fewer than k times";
    }
    std::cout << (ok ? "PASS" : "FAIL") << ' ' << o.k << "-anonymous";
    if (!ok) std::cout << ": " << detail;
    std::cout << '\n';
    return ok ? 0 : kVerifyFailed;
}

// key=value lines (blank lines and # comments skipped) become --key value
// arguments placed before the real ones, so command-line flags win.
std::vector<std::string> config_arguments(const std::string& path) {
    std::istringstream in(read_file(path));
    std::vector<std::string> args;
    std::string line;
    while (std::getline(in, line)) {
        std::string_view v = detail::trim(line);
        if (v.empty() || v.front() == '#') continue;
        const auto eq = v.find('=');
        if (eq == std::string_view::npos) throw UsageError("config line without '=': " + line);
        args.push_back("--" + std::string(detail::trim(v.substr(0, eq))));
        args.push_back(std::string(detail::trim(v.substr(eq + 1))));
    }
    return args;
}

}  // namespace

int main(int argc, char** argv) {
    Options o;
    CLI::App app{"k-anonymity for set-valued records and query logs"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    std::string config;

    auto input = [&](CLI::App* sub) { sub->add_option("input", o.input, "input file")->required(); };
    auto output = [&](CLI::App* sub) {
        sub->add_option("-o,--output", o.output, "output file (default stdout)");
        sub->add_option("--report", o.report, "JSON report file");
    };
    auto k_flag = [&](CLI::App* sub) {
        sub->add_option("--k", o.k, "anonymity parameter")->check(CLI::PositiveNumber)->capture_default_str();
    };
    auto seed_flag = [&](CLI::App* sub) { sub->add_option("--seed", o.seed, "master seed")->capture_default_str(); };
    auto lsh_flags = [&](CLI::App* sub) {
        sub->add_option("--p", o.p, "MinHash components per LSH key")->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--keyword-p", o.keyword_p, "MinHash components per keyword")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
    };
    auto threader_flags = [&](CLI::App* sub) {
        sub->add_option("--edit-threshold", o.edit_threshold, "normalized edit distance bound")
            ->check(CLI::Range(0.0, 1.0))
            ->capture_default_str();
        sub->add_option("--jaccard-threshold", o.jaccard_threshold, "keyword Jaccard bound")
            ->check(CLI::Range(0.0, 1.0))
            ->capture_default_str();
    };
    auto format_flag = [&](CLI::App* sub) {
        sub->add_option("--format", o.format, "input format")
            ->check(CLI::IsMember({"auto", "set", "log"}))
            ->capture_default_str();
    };
    auto pipeline_flags = [&](CLI::App* sub) {
        k_flag(sub);
        sub->add_option("--algorithm", o.algorithm, "per-cluster anonymizer")
            ->check(CLI::IsMember({"greedy", "cluster", "oracle"}))
            ->capture_default_str();
        seed_flag(sub);
        lsh_flags(sub);
        threader_flags(sub);
        sub->add_option("--distinct-users", o.distinct_users, "require k distinct users per released group")
            ->capture_default_str();
        sub->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--config", config, "key=value file mirroring these flags");
    };

    auto* segment = app.add_subcommand("segment", "split a query log into topic threads");
    input(segment);
    output(segment);
    seed_flag(segment);
    threader_flags(segment);

    auto* cluster = app.add_subcommand("cluster", "LSH-cluster a threads file");
    input(cluster);
    output(cluster);
    seed_flag(cluster);
    lsh_flags(cluster);

    auto* anonymize = app.add_subcommand("anonymize", "k-anonymize set data or a query log");
    input(anonymize);
    output(anonymize);
    format_flag(anonymize);
    pipeline_flags(anonymize);

    auto* sweep_cmd = app.add_subcommand("sweep", "anonymize a query log for several k");
    input(sweep_cmd);
    output(sweep_cmd);
    pipeline_flags(sweep_cmd);
    sweep_cmd->add_option("--k-list", o.k_list, "comma-separated ascending k values")->capture_default_str();

    auto* oracle = app.add_subcommand("oracle", "exact optimum for small set data");
    input(oracle);
    output(oracle);
    k_flag(oracle);

    auto* verify = app.add_subcommand("verify", "check k-anonymity of set data or anonymized log output");
    input(verify);
    format_flag(verify);
    k_flag(verify);
    seed_flag(verify);
    lsh_flags(verify);

    try {
        app.parse(argc, argv);
        if (!config.empty()) {
            // Re-parse with the config's flags first.
            std::vector<std::string> args(argv + 1, argv + argc);
            auto extra = config_arguments(config);
            args.insert(args.begin() + 1, extra.begin(), extra.end());
            std::reverse(args.begin(), args.end());  // CLI11 consumes the vector from the back
            o = Options{};
            config.clear();
            app.parse(args);
        }
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        if (code == 0) return 0;
        std::cerr << app.help();
        return kUsage;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }

    try {
        if (segment->parsed()) return cmd_segment(o);
        if (cluster->parsed()) return cmd_cluster(o);
        if (anonymize->parsed()) return cmd_anonymize(o);
        if (sweep_cmd->parsed()) return cmd_sweep(o);
        if (oracle->parsed()) return cmd_oracle(o);
        if (verify->parsed()) return cmd_verify(o);
    } catch (const VerificationError& e) {
        std::cerr << "verification failed: " << e.what() << '\n';
        return kVerifyFailed;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}
