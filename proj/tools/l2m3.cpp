// l2m3 command line: corpus tooling, pipeline runs, metrics, evaluations and
// the HTTP service.

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "l2m3/backends/factory.hpp"
#include "l2m3/backends/server.hpp"
#include "l2m3/corpus/glossary.hpp"
#include "l2m3/corpus/pii.hpp"
#include "l2m3/corpus/sample.hpp"
#include "l2m3/error.hpp"
#include "l2m3/eval/harness.hpp"
#include "l2m3/metrics/bleu.hpp"
#include "l2m3/service/service.hpp"

using nlohmann::json;
using namespace l2m3;

namespace {

std::ifstream open_in(const std::string & path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::Io, "cannot open " + path);
    return in;
}

std::ofstream open_out(const std::string & path) {
    std::ofstream out(path);
    if (!out) throw Error(Errc::Io, "cannot write " + path);
    return out;
}

std::vector<corpus::DialogueSample> read_samples(const std::string & path) {
    if (path.empty() || path == "-") return corpus::read_corpus_strict(std::cin);
    auto in = open_in(path);
    return corpus::read_corpus_strict(in);
}

void write_samples(const std::string & path, const std::vector<corpus::DialogueSample> & samples) {
    if (path.empty() || path == "-") {
        corpus::write_corpus(std::cout, samples);
        return;
    }
    auto out = open_out(path);
    corpus::write_corpus(out, samples);
}

std::vector<std::string> read_lines(const std::string & path) {
    auto in = open_in(path);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    return lines;
}

json read_json_file(const std::string & path) {
    auto in = open_in(path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error(Errc::InvalidConfig, path + ": not valid JSON");
    return j;
}

std::unique_ptr<pipeline::Pipeline> build_pipeline(const service::ServiceConfig & cfg,
                                                   const service::Backends & b) {
    auto gcfg = cfg.guardrails_config ? guardrails::GuardrailConfig::load(*cfg.guardrails_config)
                                      : guardrails::GuardrailConfig::defaults();
    if (!b.embedder) gcfg.topic_centroid_texts.clear();
    auto guard = std::make_shared<const guardrails::Guardrails>(std::move(gcfg), b.embedder.get());
    LanguageRegistry languages;
    for (const auto & l : cfg.languages) languages.add(LanguageCode(l));
    return std::make_unique<pipeline::Pipeline>(b.translator, b.chat, b.embedder, std::move(guard),
                                                std::move(languages), cfg.pipeline,
                                                std::make_shared<pipeline::SessionIdSource>(cfg.session_seed));
}

// ---- corpus ----

int corpus_validate(const std::string & path) {
    auto in = open_in(path);
    auto result = corpus::read_corpus(in);
    for (const auto & p : result.problems) std::cerr << path << ":" << p.line << ": " << p.message << "\n";
    std::cout << json{{"samples", result.samples.size()}, {"problems", result.problems.size()}}.dump() << "\n";
    return result.problems.empty() ? 0 : 1;
}

int corpus_anonymize(const std::string & path, std::vector<std::string> detectors, const std::string & judge,
                     const std::string & out_path) {
    if (detectors.empty()) detectors = corpus::builtin_detectors();
    std::shared_ptr<const backends::ChatBackend> judge_backend;
    if (!judge.empty()) judge_backend = backends::make_chat(judge);
    auto samples = read_samples(path);
    for (auto & s : samples) {
        for (auto & m : s.doc.messages) {
            m.content = corpus::anonymize(m.content, corpus::scan_pii(m.content, detectors, judge_backend.get()));
        }
    }
    write_samples(out_path, samples);
    return 0;
}

int corpus_filter(const std::string & keywords, const std::string & path, const std::string & out_path) {
    auto kw = corpus::load_daly_keywords(keywords);
    write_samples(out_path, corpus::filter_by_daly(read_samples(path), kw));
    return 0;
}

int corpus_split(const std::string & path, double fraction, std::uint64_t seed, const std::string & train_out,
                 const std::string & val_out) {
    auto split = corpus::split_dataset(read_samples(path), fraction, seed);
    if (!train_out.empty()) write_samples(train_out, split.train);
    if (!val_out.empty()) write_samples(val_out, split.validation);
    json train_ids = json::array(), val_ids = json::array();
    for (const auto & s : split.train) train_ids.push_back(s.id);
    for (const auto & s : split.validation) val_ids.push_back(s.id);
    std::cout << json{{"seed", seed}, {"validation_fraction", fraction}, {"train", train_ids},
                      {"validation", val_ids}}
                     .dump()
              << "\n";
    return 0;
}

int corpus_post_edit(const std::string & glossary) {
    auto g = corpus::Glossary::load(glossary);
    for (std::string line; std::getline(std::cin, line);) std::cout << corpus::post_edit(line, g) << "\n";
    return 0;
}

// ---- pipeline / metrics ----

int pipeline_run(const std::string & lang, const std::string & config_path) {
    auto cfg = service::load_config(config_path);
    auto b = service::make_backends(cfg);
    auto p = build_pipeline(cfg, b);
    auto session = p->create_session(lang);
    for (std::string line; std::getline(std::cin, line);) {
        std::cout << pipeline::to_json(p->handle_turn(session, line)).dump() << std::endl;
    }
    return 0;
}

int metrics_bleu(const std::string & cand, const std::vector<std::string> & refs) {
    std::vector<metrics::TokenizedSegment> cands;
    for (const auto & l : read_lines(cand)) cands.push_back(metrics::tokenize(l));
    std::vector<std::vector<metrics::TokenizedSegment>> references(cands.size());
    for (const auto & r : refs) {
        auto lines = read_lines(r);
        if (lines.size() != cands.size()) {
            throw Error(Errc::LengthMismatch, r + " has " + std::to_string(lines.size()) + " lines, candidates have " +
                                                  std::to_string(cands.size()));
        }
        for (std::size_t i = 0; i < lines.size(); ++i) references[i].push_back(metrics::tokenize(lines[i]));
    }
    auto s = metrics::bleu(cands, references);
    std::cout << json{{"bleu", s.score},
                      {"precisions", s.precisions},
                      {"brevity_penalty", s.brevity_penalty},
                      {"candidate_len", s.candidate_len},
                      {"reference_len", s.reference_len}}
                     .dump()
              << "\n";
    return 0;
}

// ---- eval ----

struct EvalSettings {
    LanguageCode src_lang{"te"};
    LanguageCode tgt_lang{"en"};
    bool both_directions = false;
    LanguageCode lang{"te"};
    LanguageCode pivot{"en"};
    std::string answerer = "chat";
    double p_correct = 1.0;
    double p_wrong = -0.25;
    std::size_t parallelism = 4;
    bool semantic_similarity = false;
};

EvalSettings eval_settings(const json & root) {
    EvalSettings s;
    if (!root.contains("eval")) return s;
    const auto & e = root.at("eval");
    try {
        s.src_lang = LanguageCode(e.value("src_lang", s.src_lang.str()));
        s.tgt_lang = LanguageCode(e.value("tgt_lang", s.tgt_lang.str()));
        s.both_directions = e.value("both_directions", s.both_directions);
        s.lang = LanguageCode(e.value("lang", s.lang.str()));
        s.pivot = LanguageCode(e.value("pivot", s.pivot.str()));
        s.answerer = e.value("answerer", s.answerer);
        s.p_correct = e.value("p_correct", s.p_correct);
        s.p_wrong = e.value("p_wrong", s.p_wrong);
        s.parallelism = e.value("parallelism", s.parallelism);
        s.semantic_similarity = e.value("semantic_similarity", s.semantic_similarity);
    } catch (const json::exception & ex) {
        throw Error(Errc::InvalidConfig, std::string("bad eval settings: ") + ex.what());
    }
    if (s.answerer != "chat" && s.answerer != "pipeline") {
        throw Error(Errc::InvalidConfig, "eval.answerer must be \"chat\" or \"pipeline\"");
    }
    return s;
}

int eval_run(const std::string & kind, const std::string & config_path, const std::string & data,
             const std::string & out_path, const std::string & csv_path) {
    auto root = read_json_file(config_path);
    auto cfg = service::load_config(config_path);
    auto settings = eval_settings(root);
    auto b = service::make_backends(cfg);

    eval::RunOptions opts;
    opts.parallelism = settings.parallelism;
    if (settings.semantic_similarity) opts.embedder = b.embedder.get();

    auto need = [](bool present, const char * what) {
        if (!present) throw Error(Errc::InvalidConfig, std::string("eval needs a configured ") + what);
    };

    eval::EvalReport report;
    if (kind == "translate") {
        need(b.translator != nullptr, "translator");
        auto in = open_in(data);
        auto corpus = eval::read_parallel_corpus(in, settings.src_lang, settings.tgt_lang);
        report = eval::eval_translation(corpus, *b.translator, opts, settings.both_directions);
    } else if (kind == "roundtrip") {
        need(b.translator != nullptr, "translator");
        std::vector<std::string> texts;
        auto in = open_in(data);
        for (std::string line; std::getline(in, line);) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            auto j = json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.is_object()) throw Error(Errc::InvalidArgument, "bad JSONL line: " + line);
            texts.push_back(j.contains("text") ? j.at("text").get<std::string>() : j.at("src").get<std::string>());
        }
        report = eval::eval_round_trip(texts, settings.lang, settings.pivot, *b.translator, opts);
    } else {
        auto in = open_in(data);
        auto items = eval::read_rht_items(in);
        eval::RhtOptions ropts{settings.p_correct, settings.p_wrong, settings.parallelism};
        if (settings.answerer == "pipeline") {
            auto p = build_pipeline(cfg, b);
            report = eval::run_rht(items, eval::PipelineAnswerer(*p), ropts);
        } else {
            need(b.chat != nullptr, "chat backend");
            report = eval::run_rht(items, eval::ChatAnswerer(*b.chat), ropts);
        }
    }

    {
        auto out = open_out(out_path);
        out << eval::to_json(report).dump(2) << "\n";
    }
    if (!csv_path.empty()) {
        auto out = open_out(csv_path);
        eval::write_csv(out, report);
    }
    std::cout << eval::to_json(report).dump() << "\n";
    return 0;
}

// ---- servers ----

// Blocks SIGINT/SIGTERM in every thread and waits for one of them.
class SignalWaiter {
public:
    SignalWaiter() {
        sigemptyset(&set_);
        sigaddset(&set_, SIGINT);
        sigaddset(&set_, SIGTERM);
        pthread_sigmask(SIG_BLOCK, &set_, nullptr);
    }
    void wait() {
        int sig = 0;
        sigwait(&set_, &sig);
    }

private:
    sigset_t set_{};
};

int serve(const std::optional<std::string> & config_path) {
    SignalWaiter signals;
    auto cfg = service::config_from_env(config_path);
    service::Service svc(cfg);
    int port = svc.start();
    std::cout << "listening on " << cfg.host << ":" << port << std::endl;
    signals.wait();
    svc.stop();
    return 0;
}

int serve_mock(const std::string & translator, const std::string & chat, const std::string & embedder,
               const std::string & listen) {
    SignalWaiter signals;
    auto colon = listen.rfind(':');
    if (colon == std::string::npos) throw Error(Errc::InvalidArgument, "--listen must be host:port");
    std::string host = listen.substr(0, colon);
    int port = std::stoi(listen.substr(colon + 1));
    backends::WireServer server(translator.empty() ? nullptr : backends::make_translator(translator),
                                chat.empty() ? nullptr : backends::make_chat(chat),
                                embedder.empty() ? nullptr : backends::make_embedder(embedder));
    port = server.start(host, port);
    std::cout << "listening on " << host << ":" << port << std::endl;
    signals.wait();
    server.stop();
    return 0;
}

} // namespace

int main(int argc, char ** argv) {
    CLI::App app{"l2m3: local-language medical assistant gateway and evaluation tools"};
    app.require_subcommand(1);
    std::function<int()> action;

    // corpus
    auto * corpus_cmd = app.add_subcommand("corpus", "ChatML corpus tooling")->require_subcommand(1);

    std::string file, out_path, keywords, glossary, judge, train_out, val_out;
    std::vector<std::string> detectors;
    double fraction = 0.1;
    std::uint64_t seed = 0;

    auto * validate = corpus_cmd->add_subcommand("validate", "Check a JSONL corpus, reporting every bad line");
    validate->add_option("file", file, "Corpus file")->required();
    validate->callback([&] { action = [&] { return corpus_validate(file); }; });

    auto * anon = corpus_cmd->add_subcommand("anonymize", "Redact PII in every message");
    anon->add_option("file", file, "Corpus file (- for stdin)")->required();
    anon->add_option("--detectors", detectors, "Detectors (EMAIL PHONE ID_NUMBER NAME ADDRESS LLM_JUDGE)")
        ->delimiter(',');
    anon->add_option("--judge", judge, "Chat backend for LLM_JUDGE");
    anon->add_option("--out", out_path, "Output corpus (default stdout)");
    anon->callback([&] { action = [&] { return corpus_anonymize(file, detectors, judge, out_path); }; });

    auto * filter = corpus_cmd->add_subcommand("filter", "Keep samples matching DALY keywords");
    filter->add_option("--keywords", keywords, "DALY keyword file")->required();
    filter->add_option("file", file, "Corpus file (default stdin)");
    filter->add_option("--out", out_path, "Output corpus (default stdout)");
    filter->callback([&] { action = [&] { return corpus_filter(keywords, file, out_path); }; });

    auto * split = corpus_cmd->add_subcommand("split", "Seeded train/validation split");
    split->add_option("--fraction", fraction, "Validation fraction in [0, 1)")->required();
    split->add_option("--seed", seed, "PRNG seed")->required();
    split->add_option("file", file, "Corpus file (default stdin)");
    split->add_option("--train-out", train_out, "Write the training samples here");
    split->add_option("--val-out", val_out, "Write the validation samples here");
    split->callback([&] { action = [&] { return corpus_split(file, fraction, seed, train_out, val_out); }; });

    auto * post = corpus_cmd->add_subcommand("post-edit", "Apply a glossary to stdin lines");
    post->add_option("--glossary", glossary, "Glossary file")->required();
    post->callback([&] { action = [&] { return corpus_post_edit(glossary); }; });

    // pipeline
    auto * pipe_cmd = app.add_subcommand("pipeline", "Run the gateway pipeline")->require_subcommand(1);
    std::string lang = "en", config;
    auto * run = pipe_cmd->add_subcommand("run", "One session; a query per stdin line, an outcome per stdout line");
    run->add_option("--lang", lang, "CHW language")->required();
    run->add_option("--config", config, "Service config file")->required();
    run->callback([&] { action = [&] { return pipeline_run(lang, config); }; });

    // metrics
    auto * metrics_cmd = app.add_subcommand("metrics", "Evaluation metrics")->require_subcommand(1);
    std::string cand;
    std::vector<std::string> refs;
    auto * bleu = metrics_cmd->add_subcommand("bleu", "Corpus BLEU over line-aligned files");
    bleu->add_option("--cand", cand, "Candidate segments, one per line")->required();
    bleu->add_option("--ref", refs, "Reference file (repeatable)")->required();
    bleu->callback([&] { action = [&] { return metrics_bleu(cand, refs); }; });

    // eval
    auto * eval_cmd = app.add_subcommand("eval", "Batch evaluations")->require_subcommand(1);
    std::string data, csv;
    for (const char * kind : {"translate", "roundtrip", "rht"}) {
        auto * sub = eval_cmd->add_subcommand(kind, std::string("Run the ") + kind + " evaluation");
        sub->add_option("--config", config, "Config file (service config plus an \"eval\" section)")->required();
        sub->add_option("--data", data, "JSONL dataset")->required();
        sub->add_option("--out", out_path, "Report JSON")->required();
        sub->add_option("--csv", csv, "Also write the rows as CSV");
        std::string k = kind;
        sub->callback([&, k] { action = [&, k] { return eval_run(k, config, data, out_path, csv); }; });
    }

    // serve
    std::optional<std::string> serve_config;
    auto * serve_cmd = app.add_subcommand("serve", "HTTP service (config from --config or L2M3_CONFIG)");
    serve_cmd->add_option("--config", serve_config, "Service config file");
    serve_cmd->callback([&] { action = [&] { return serve(serve_config); }; });

    // backends
    auto * backends_cmd = app.add_subcommand("backends", "Backend utilities")->require_subcommand(1);
    std::string mock_translator = "mock:identity", mock_chat = "mock:echo", mock_embedder = "mock:hash";
    std::string listen = "127.0.0.1:8090";
    auto * mock = backends_cmd->add_subcommand("serve-mock", "Serve mock backends over the wire protocol");
    mock->add_option("--translator", mock_translator, "Translator endpoint (empty to disable)");
    mock->add_option("--chat", mock_chat, "Chat endpoint (empty to disable)");
    mock->add_option("--embedder", mock_embedder, "Embedder endpoint (empty to disable)");
    mock->add_option("--listen", listen, "host:port (port 0 picks a free one)");
    mock->callback([&] { action = [&] { return serve_mock(mock_translator, mock_chat, mock_embedder, listen); }; });

    CLI11_PARSE(app, argc, argv);
    try {
        return action ? action() : 0;
    } catch (const Error & e) {
        std::cerr << "l2m3: " << e.what() << "\n";
        return 1;
    } catch (const std::exception & e) {
        std::cerr << "l2m3: " << e.what() << "\n";
        return 1;
    }
}
