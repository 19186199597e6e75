#include "reachck/cli.hpp"

#include "reachck/meta.hpp"
#include "reachck/parse.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace reachck {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct Diagnostic {
    std::string severity = "error";
    std::string kind;
    Span span;
    std::string message;
};

struct Options {
    bool json = false;
    std::size_t fuel = 100000;
    bool trace = false;
    bool preserve = false;
    bool all = false;
    std::string path;
};

struct Loaded {
    TermP term;
    std::optional<Diagnostic> diag;
    int code = kExitOk;
};

ordered_json toJson(const Diagnostic& d, const std::string& file) {
    ordered_json j;
    if (!file.empty()) j["file"] = file;
    j["severity"] = d.severity;
    j["kind"] = d.kind;
    j["span"] = {{"startLine", d.span.startLine},
                 {"startCol", d.span.startCol},
                 {"endLine", d.span.endLine},
                 {"endCol", d.span.endCol}};
    j["message"] = d.message;
    return j;
}

std::string render(const Diagnostic& d) {
    std::ostringstream o;
    o << d.severity << "[" << d.kind << "] at " << d.span.startLine << ":" << d.span.startCol << "-" << d.span.endLine
      << ":" << d.span.endCol << ": " << d.message;
    return o.str();
}

bool readFile(const std::string& path, std::string& text) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
    return !in.bad();
}

// Parse and typecheck; the checker is filled in when given.
Loaded load(const std::string& text, Checker* checker, QType* type) {
    Loaded l;
    try {
        l.term = parseProgram(text);
    } catch (const ParseError& e) {
        l.diag = Diagnostic{"error", "ParseError", e.span, e.what()};
        l.code = kExitParseError;
        return l;
    }
    try {
        static const StoreTyping empty;
        QType q = typecheckRuntime(l.term, empty, {}, checker);
        if (type) *type = q;
    } catch (const TypeErrorEx& e) {
        l.diag = Diagnostic{"error", kindName(e.kind), e.span, e.what()};
        l.code = kExitTypeError;
    }
    return l;
}

class Driver {
public:
    Driver(const Options& o, std::ostream& out, std::ostream& err) : opt_(o), out_(out), err_(err) {}

    int check(const std::string& path, const std::string& label) {
        std::string text;
        if (!readFile(path, text)) return ioError(path);
        QType q;
        Loaded l = load(text, nullptr, &q);
        if (l.diag) {
            report(*l.diag, label);
            return l.code;
        }
        if (!opt_.json) out_ << prefix(label) << printQType(q) << "\n";
        return kExitOk;
    }

    int run(const std::string& path, const std::string& label) {
        std::string text;
        if (!readFile(path, text)) return ioError(path);
        Loaded l = load(text, nullptr, nullptr);
        if (l.diag) {
            report(*l.diag, label);
            return l.code;
        }
        if (opt_.preserve) {
            OracleReport rep = preservationCheck(l.term, opt_.fuel);
            if (!rep.ok) {
                report(Diagnostic{"error", "PreservationFailure", l.term->span, rep.failure}, label);
                if (!opt_.json && rep.witnessTerm)
                    out_ << prefix(label) << "witness: " << printTerm(rep.witnessTerm) << "\n";
                return kExitOracleFailure;
            }
        }
        StepHook hook;
        if (opt_.trace && !opt_.json)
            hook = [&](std::size_t n, const StepResult& r) {
                out_ << prefix(label) << "step " << n << ": " << r.rule;
                if (r.allocated) out_ << " @" << *r.allocated;
                out_ << "\n";
            };
        EvalResult res = evalFuel(l.term, opt_.fuel, {}, hook);
        if (res.stuck) {
            report(Diagnostic{"error", "Stuck", l.term->span, res.reason}, label);
            return kExitOracleFailure;
        }
        if (opt_.json) return kExitOk;
        if (res.exhausted)
            out_ << prefix(label) << "out of fuel after " << res.steps << " steps\n";
        else
            out_ << prefix(label) << printTerm(res.term) << "\n";
        if (opt_.preserve) out_ << prefix(label) << "preservation: ok\n";
        return kExitOk;
    }

    int graph(const std::string& path, const std::string& label) {
        std::string text;
        if (!readFile(path, text)) return ioError(path);
        Checker c;
        QType q;
        Loaded l = load(text, &c, &q);
        if (l.diag) {
            report(*l.diag, label);
            return l.code;
        }
        if (!opt_.json) out_ << dot(c, label);
        return kExitOk;
    }

    // JSON mode collects diagnostics and prints them once at the end.
    void flushJson() {
        if (!opt_.json || flushed_) return;
        out_ << json_.dump(2) << "\n";
        flushed_ = true;
    }

private:
    const Options& opt_;
    std::ostream& out_;
    std::ostream& err_;
    ordered_json json_ = ordered_json::array();
    bool flushed_ = false;

    std::string prefix(const std::string& label) const { return label.empty() ? "" : label + ": "; }

    void report(const Diagnostic& d, const std::string& label) {
        if (opt_.json)
            json_.push_back(toJson(d, label));
        else
            out_ << prefix(label) << render(d) << "\n";
    }

    int ioError(const std::string& path) {
        err_ << "reachck: cannot read " << path << "\n";
        return kExitIoError;
    }

    static std::string quote(const std::string& s) {
        std::string o = "\"";
        for (char ch : s) {
            if (ch == '"' || ch == '\\') o += '\\';
            o += ch;
        }
        return o + "\"";
    }

    static std::string atomNode(const Atom& a) {
        switch (a.kind) {
            case Atom::Kind::Var: return quote(a.name);
            case Atom::Kind::Loc: return quote("@" + std::to_string(a.loc));
            default: return quote("fresh");
        }
    }

    static void collectLocs(const Qual& q, std::set<std::size_t>& locs) {
        for (const auto& a : q)
            if (a.kind == Atom::Kind::Loc) locs.insert(a.loc);
    }

    // Bindings in source order, declared-qualifier edges solid, referent
    // edges dashed.
    std::string dot(const Checker& c, const std::string& label) const {
        std::ostringstream o;
        o << "digraph " << quote(label.empty() ? "reach" : label) << " {\n";
        o << "  node [shape=box];\n";
        std::set<std::string> seen;
        std::set<std::size_t> locs;
        bool anyFresh = false;
        struct Edge {
            std::string from, to;
            bool referent;
        };
        std::vector<Edge> edges;
        for (const Term* let : c.letOrder) {
            const auto& rec = c.lets.at(let);
            std::string node = quote(rec.name);
            if (!seen.insert(rec.name).second) continue;
            const QType& d = rec.declared;
            bool fresh = containsFresh(d.q);
            o << "  " << node << " [label=" << quote(rec.name + " : " + printQType(d));
            if (fresh) o << ", style=filled, fillcolor=lightgray, peripheries=2";
            o << "];\n";
            for (const auto& a : d.q) {
                if (a.kind == Atom::Kind::Fresh) anyFresh = true;
                edges.push_back({node, atomNode(a), false});
            }
            collectLocs(d.q, locs);
            if (d.ty->kind == TypeKind::Ref) {
                for (const auto& a : d.ty->b.q) {
                    if (a.kind == Atom::Kind::Fresh) continue;
                    bool self = a.kind == Atom::Kind::Var && a.name == d.ty->self;
                    edges.push_back({node, self ? node : atomNode(a), true});
                }
                collectLocs(d.ty->b.q, locs);
            }
        }
        for (std::size_t l : locs) o << "  " << quote("@" + std::to_string(l)) << " [shape=ellipse];\n";
        if (anyFresh) o << "  \"fresh\" [shape=diamond];\n";
        for (const auto& e : edges) {
            o << "  " << e.from << " -> " << e.to;
            if (e.referent) o << " [style=dashed]";
            o << ";\n";
        }
        o << "}\n";
        return o.str();
    }
};

std::vector<std::string> targets(const Options& o, std::ostream& err, int& code) {
    std::vector<std::string> files;
    if (!o.all) {
        files.push_back(o.path);
        return files;
    }
    std::error_code ec;
    if (!fs::is_directory(o.path, ec)) {
        err << "reachck: --all expects a directory: " << o.path << "\n";
        code = kExitIoError;
        return files;
    }
    for (const auto& e : fs::directory_iterator(o.path, ec))
        if (e.is_regular_file() && e.path().extension() == ".rt") files.push_back(e.path().string());
    std::sort(files.begin(), files.end());
    return files;
}

int fuzz(std::size_t count, std::ostream& out) {
    std::uint64_t seed = 0;
    if (const char* s = std::getenv("REACHCK_SEED")) seed = std::strtoull(s, nullptr, 10);
    std::mt19937_64 rng(seed);
    std::size_t failures = 0, values = 0, exhausted = 0;
    for (std::size_t i = 0; i < count; ++i) {
        TermP t = genWellTyped(rng, 6);
        OracleReport rep = preservationCheck(t, 200);
        if (!rep.ok) {
            ++failures;
            out << "program " << i << ": " << rep.failure << "\n  " << rep.program << "\n";
            continue;
        }
        (rep.reachedValue ? values : exhausted)++;
    }
    out << "seed " << seed << ": " << count << " programs, " << values << " values, " << exhausted << " out of fuel, "
        << failures << " failures\n";
    return failures ? kExitOracleFailure : kExitOk;
}

}  // namespace

int runCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"reachck"};
    app.require_subcommand(1);
    Options opt;
    std::size_t count = 100;
    auto common = [&](CLI::App* sub) {
        sub->add_flag("--json", opt.json, "emit diagnostics as JSON");
        sub->add_flag("--all", opt.all, "process every .rt file in a directory");
        sub->add_option("path", opt.path, "source file or directory")->required();
    };
    CLI::App* check = app.add_subcommand("check", "typecheck a program");
    common(check);
    CLI::App* run = app.add_subcommand("run", "typecheck and evaluate a program");
    common(run);
    run->add_option("--fuel", opt.fuel, "step budget");
    run->add_flag("--trace", opt.trace, "print each reduction rule");
    run->add_flag("--preserve", opt.preserve, "validate preservation at every step");
    CLI::App* graph = app.add_subcommand("graph", "emit the reachability graph as DOT");
    common(graph);
    CLI::App* fz = app.add_subcommand("fuzz", "check oracles on generated programs");
    fz->add_option("--count", count, "number of programs");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o, e2;
        int rc = app.exit(e, o, e2);
        out << o.str();
        err << e2.str();
        return rc == 0 ? kExitOk : kExitUsage;
    }

    if (fz->parsed()) return fuzz(count, out);

    int code = kExitOk;
    std::vector<std::string> files = targets(opt, err, code);
    if (code != kExitOk) return code;
    Driver d(opt, out, err);
    for (const auto& f : files) {
        std::string label = opt.all ? fs::path(f).filename().string() : "";
        int rc = check->parsed() ? d.check(f, label) : run->parsed() ? d.run(f, label) : d.graph(f, label);
        if (rc == kExitIoError) return rc;
        code = std::max(code, rc);
    }
    d.flushJson();
    return code;
}

}  // namespace reachck
