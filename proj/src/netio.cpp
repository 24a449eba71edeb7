#include "valelim/netio.hpp"

#include "valelim/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <unordered_map>

namespace valelim {

ParseError::ParseError(const std::string & message, std::size_t line, std::size_t column) :
    Error(line == 0 ? message : "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
    line_(line),
    column_(column)
{
}

namespace {

std::string format_number(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Rows already within a few ulps of one are left untouched so that
// write/parse cycles reproduce tables bit for bit.
bool needs_renormalizing(double sum)
{
    return std::abs(sum - 1.0) > 8 * std::numeric_limits<double>::epsilon();
}

// ---------------------------------------------------------------------------
// BIF subset

struct Token {
    enum class Kind { word, punct, end } kind;
    std::string text;
    std::size_t line;
    std::size_t column;
};

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    std::vector<Token> tokenize()
    {
        std::vector<Token> out;
        while (true) {
            skip_space_and_comments();
            if (pos_ >= text_.size()) {
                out.push_back({Token::Kind::end, "", line_, col_});
                return out;
            }
            char c = text_[pos_];
            std::size_t line = line_, col = col_;
            if (is_punct(c)) {
                advance();
                out.push_back({Token::Kind::punct, std::string(1, c), line, col});
            }
            else if (c == '"') {
                advance();
                std::string word;
                while (pos_ < text_.size() && text_[pos_] != '"')
                    word += advance();
                if (pos_ >= text_.size())
                    throw ParseError("unterminated string", line, col);
                advance();
                out.push_back({Token::Kind::word, word, line, col});
            }
            else {
                std::string word;
                while (pos_ < text_.size() && ! is_punct(text_[pos_]) && text_[pos_] != '"'
                       && ! std::isspace(static_cast<unsigned char>(text_[pos_]))
                       && ! starts_comment())
                    word += advance();
                out.push_back({Token::Kind::word, word, line, col});
            }
        }
    }

private:
    static bool is_punct(char c) { return std::string_view("{}()[];,|").find(c) != std::string_view::npos; }

    bool starts_comment() const
    {
        return text_[pos_] == '/' && pos_ + 1 < text_.size() && (text_[pos_ + 1] == '/' || text_[pos_ + 1] == '*');
    }

    char advance()
    {
        char c = text_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        }
        else
            ++col_;
        return c;
    }

    void skip_space_and_comments()
    {
        while (pos_ < text_.size()) {
            if (std::isspace(static_cast<unsigned char>(text_[pos_])))
                advance();
            else if (starts_comment() && text_[pos_ + 1] == '/') {
                while (pos_ < text_.size() && text_[pos_] != '\n')
                    advance();
            }
            else if (starts_comment()) {
                std::size_t line = line_, col = col_;
                advance();
                advance();
                while (pos_ + 1 < text_.size() && ! (text_[pos_] == '*' && text_[pos_ + 1] == '/'))
                    advance();
                if (pos_ + 1 >= text_.size())
                    throw ParseError("unterminated comment", line, col);
                advance();
                advance();
            }
            else
                return;
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
};

struct PendingCpt {
    VarId child;
    std::vector<VarId> parents;
    std::vector<std::optional<std::vector<double>>> rows;
    std::optional<std::vector<double>> default_row;
    std::vector<std::size_t> row_lines;
    std::size_t line;
    std::size_t column;
};

class BifParser {
public:
    BifParser(std::string_view text, const ParseOptions & options) : tokens_(Lexer(text).tokenize()), options_(options) {}

    BayesNet parse()
    {
        while (! at_end()) {
            const auto & t = peek();
            if (t.kind != Token::Kind::word)
                fail("expected a block keyword");
            if (t.text == "network")
                parse_network_block();
            else if (t.text == "variable")
                parse_variable();
            else if (t.text == "probability")
                parse_probability();
            else
                fail("unknown block '" + t.text + "'");
        }
        return finish();
    }

private:
    const Token & peek() const { return tokens_[pos_]; }
    bool at_end() const { return peek().kind == Token::Kind::end; }
    const Token & next() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }

    [[noreturn]] void fail(const std::string & message) const
    {
        throw ParseError(message, peek().line, peek().column);
    }

    bool is_punct(char c) const { return peek().kind == Token::Kind::punct && peek().text[0] == c; }

    void expect_punct(char c)
    {
        if (! is_punct(c))
            fail(std::string("expected '") + c + "'");
        next();
    }

    std::string expect_word(const char * what)
    {
        if (peek().kind != Token::Kind::word)
            fail(std::string("expected ") + what);
        return next().text;
    }

    double expect_number()
    {
        const auto & t = peek();
        if (t.kind != Token::Kind::word)
            fail("expected a probability");
        double x = 0.0;
        auto first = t.text.data();
        auto last = first + t.text.size();
        auto [ptr, ec] = std::from_chars(first, last, x);
        if (ec != std::errc() || ptr != last)
            fail("'" + t.text + "' is not a number");
        next();
        return x;
    }

    // Skips a balanced { ... } block, or a `property ... ;` statement.
    void skip_block()
    {
        expect_punct('{');
        int depth = 1;
        while (depth > 0) {
            if (at_end())
                fail("unterminated block");
            if (is_punct('{'))
                ++depth;
            else if (is_punct('}'))
                --depth;
            next();
        }
    }

    void skip_property()
    {
        while (! is_punct(';')) {
            if (at_end())
                fail("unterminated property");
            next();
        }
        next();
    }

    void parse_network_block()
    {
        next();
        if (peek().kind == Token::Kind::word)
            next();
        skip_block();
    }

    void parse_variable()
    {
        next();
        const auto & name_tok = peek();
        std::string name = expect_word("a variable name");
        if (index_.count(name))
            throw ParseError("duplicate variable " + name, name_tok.line, name_tok.column);
        expect_punct('{');
        std::optional<std::vector<std::string>> domain;
        while (! is_punct('}')) {
            if (at_end())
                fail("unterminated variable block");
            auto keyword = expect_word("'type' or 'property'");
            if (keyword == "property") {
                skip_property();
                continue;
            }
            if (keyword != "type")
                fail("unexpected '" + keyword + "' in variable block");
            auto kind = expect_word("a variable type");
            if (kind != "discrete")
                fail("only discrete variables are supported");
            expect_punct('[');
            double declared = expect_number();
            expect_punct(']');
            expect_punct('{');
            std::vector<std::string> labels;
            while (true) {
                labels.push_back(expect_word("a value label"));
                if (is_punct(','))
                    next();
                else
                    break;
            }
            expect_punct('}');
            expect_punct(';');
            if (declared != static_cast<double>(labels.size()))
                fail("variable " + name + " declares " + format_number(declared) + " values but lists "
                     + std::to_string(labels.size()));
            domain = std::move(labels);
        }
        expect_punct('}');
        if (! domain)
            throw ParseError("variable " + name + " has no type", name_tok.line, name_tok.column);
        index_[name] = static_cast<VarId>(variables_.size());
        variables_.push_back({name, std::move(*domain)});
    }

    VarId lookup(const Token & tok) const
    {
        auto it = index_.find(tok.text);
        if (it == index_.end())
            throw ParseError("unknown variable " + tok.text, tok.line, tok.column);
        return it->second;
    }

    std::size_t row_count(const std::vector<VarId> & parents) const
    {
        std::size_t rows = 1;
        for (VarId p : parents)
            rows *= variables_[static_cast<std::size_t>(p)].domain.size();
        return rows;
    }

    std::vector<double> read_numbers()
    {
        std::vector<double> values;
        while (true) {
            values.push_back(expect_number());
            if (is_punct(','))
                next();
            else
                break;
        }
        expect_punct(';');
        return values;
    }

    void parse_probability()
    {
        const auto start = peek();
        next();
        expect_punct('(');
        const auto child_tok = peek();
        expect_word("a child variable");
        VarId child = lookup(child_tok);
        std::vector<VarId> parents;
        if (is_punct('|')) {
            next();
            while (true) {
                const auto tok = peek();
                expect_word("a parent variable");
                parents.push_back(lookup(tok));
                if (is_punct(','))
                    next();
                else
                    break;
            }
        }
        expect_punct(')');
        for (const auto & p : pending_)
            if (p.child == child)
                throw ParseError("duplicate CPT for " + child_tok.text, start.line, start.column);

        PendingCpt cpt{child, parents, {}, std::nullopt, {}, start.line, start.column};
        const auto rows = row_count(parents);
        const auto width = variables_[static_cast<std::size_t>(child)].domain.size();
        cpt.rows.resize(rows);
        cpt.row_lines.assign(rows, start.line);

        std::vector<std::size_t> strides(parents.size(), 1);
        for (std::size_t i = parents.size(); i-- > 1;)
            strides[i - 1] = strides[i] * variables_[static_cast<std::size_t>(parents[i])].domain.size();

        expect_punct('{');
        while (! is_punct('}')) {
            if (at_end())
                fail("unterminated probability block");
            const auto head = peek();
            if (is_punct('(')) {
                next();
                std::size_t row = 0;
                for (std::size_t i = 0; i < parents.size(); ++i) {
                    if (i > 0)
                        expect_punct(',');
                    const auto label_tok = peek();
                    auto label = expect_word("a parent value");
                    const auto & domain = variables_[static_cast<std::size_t>(parents[i])].domain;
                    auto it = std::find(domain.begin(), domain.end(), label);
                    if (it == domain.end())
                        throw ParseError("unknown value " + label + " for "
                                             + variables_[static_cast<std::size_t>(parents[i])].name,
                                         label_tok.line, label_tok.column);
                    row += strides[i] * static_cast<std::size_t>(it - domain.begin());
                }
                expect_punct(')');
                auto values = read_numbers();
                if (values.size() != width)
                    throw ParseError("row has " + std::to_string(values.size()) + " entries, expected "
                                         + std::to_string(width),
                                     head.line, head.column);
                if (cpt.rows[row])
                    throw ParseError("row given twice", head.line, head.column);
                cpt.rows[row] = std::move(values);
                cpt.row_lines[row] = head.line;
                continue;
            }
            auto keyword = expect_word("'table', 'default', or a row");
            if (keyword == "property") {
                skip_property();
            }
            else if (keyword == "table") {
                auto values = read_numbers();
                if (values.size() != rows * width)
                    throw ParseError("table has " + std::to_string(values.size()) + " entries, expected "
                                         + std::to_string(rows * width),
                                     head.line, head.column);
                for (std::size_t r = 0; r < rows; ++r) {
                    cpt.rows[r] = std::vector<double>(values.begin() + static_cast<std::ptrdiff_t>(r * width),
                                                      values.begin() + static_cast<std::ptrdiff_t>((r + 1) * width));
                    cpt.row_lines[r] = head.line;
                }
            }
            else if (keyword == "default") {
                auto values = read_numbers();
                if (values.size() != width)
                    throw ParseError("default row has wrong width", head.line, head.column);
                cpt.default_row = std::move(values);
            }
            else
                throw ParseError("unexpected '" + keyword + "' in probability block", head.line, head.column);
        }
        expect_punct('}');
        pending_.push_back(std::move(cpt));
    }

    BayesNet finish()
    {
        std::vector<Cpt> cpts(variables_.size());
        std::vector<char> have(variables_.size(), 0);
        for (auto & p : pending_) {
            auto & out = cpts[static_cast<std::size_t>(p.child)];
            out.child = p.child;
            out.parents = p.parents;
            const auto & name = variables_[static_cast<std::size_t>(p.child)].name;
            for (std::size_t r = 0; r < p.rows.size(); ++r) {
                auto row = p.rows[r] ? *p.rows[r] : (p.default_row ? *p.default_row : std::vector<double>{});
                if (row.empty())
                    throw ParseError("CPT " + name + " is missing row " + std::to_string(r), p.line, p.column);
                double sum = 0.0;
                for (double x : row) {
                    if (! (x >= 0.0 && x <= 1.0))
                        throw ParseError("CPT " + name + " row " + std::to_string(r) + " has entry "
                                             + format_number(x) + " outside [0,1]",
                                         p.row_lines[r], 1);
                    sum += x;
                }
                if (! (std::abs(sum - 1.0) <= options_.row_tolerance))
                    throw ParseError("CPT " + name + " row " + std::to_string(r) + ": row sum " + format_number(sum)
                                         + " != 1",
                                     p.row_lines[r], 1);
                if (needs_renormalizing(sum))
                    for (double & x : row)
                        x /= sum;
                out.table.insert(out.table.end(), row.begin(), row.end());
            }
            have[static_cast<std::size_t>(p.child)] = 1;
        }
        for (std::size_t v = 0; v < variables_.size(); ++v)
            if (! have[v])
                throw ParseError("variable " + variables_[v].name + " has no probability block");

        BayesNet net(variables_, std::move(cpts));
        auto violations = validate_network(net);
        if (! violations.empty())
            throw ParseError(violations.front().message);
        return net;
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    const ParseOptions & options_;
    std::vector<Variable> variables_;
    std::unordered_map<std::string, VarId> index_;
    std::vector<PendingCpt> pending_;
};

// ---------------------------------------------------------------------------
// JSON fixtures

BayesNet parse_json(std::string_view text, const ParseOptions & options)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    }
    catch (const nlohmann::json::parse_error & e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }

    try {
        std::vector<Variable> variables;
        std::unordered_map<std::string, VarId> index;
        for (const auto & v : doc.at("variables")) {
            Variable var{v.at("name").get<std::string>(), v.at("values").get<std::vector<std::string>>()};
            if (! index.emplace(var.name, static_cast<VarId>(variables.size())).second)
                throw ParseError("duplicate variable " + var.name);
            variables.push_back(std::move(var));
        }
        auto lookup = [&](const std::string & name) {
            auto it = index.find(name);
            if (it == index.end())
                throw ParseError("unknown variable " + name);
            return it->second;
        };

        std::vector<Cpt> cpts(variables.size());
        std::vector<char> have(variables.size(), 0);
        for (const auto & c : doc.at("cpts")) {
            VarId child = lookup(c.at("child").get<std::string>());
            if (have[static_cast<std::size_t>(child)])
                throw ParseError("duplicate CPT for " + variables[static_cast<std::size_t>(child)].name);
            have[static_cast<std::size_t>(child)] = 1;
            auto & cpt = cpts[static_cast<std::size_t>(child)];
            cpt.child = child;
            for (const auto & p : c.value("parents", std::vector<std::string>{}))
                cpt.parents.push_back(lookup(p));
            cpt.table = c.at("table").get<std::vector<double>>();

            const auto width = variables[static_cast<std::size_t>(child)].domain.size();
            if (width == 0 || cpt.table.size() % width != 0)
                throw ParseError("CPT " + variables[static_cast<std::size_t>(child)].name + " has a ragged table");
            for (std::size_t r = 0; r * width < cpt.table.size(); ++r) {
                double sum = 0.0;
                for (std::size_t k = 0; k < width; ++k)
                    sum += cpt.table[r * width + k];
                if (! (std::abs(sum - 1.0) <= options.row_tolerance))
                    throw ParseError("CPT " + variables[static_cast<std::size_t>(child)].name + " row "
                                     + std::to_string(r) + ": row sum " + format_number(sum) + " != 1");
                if (needs_renormalizing(sum))
                    for (std::size_t k = 0; k < width; ++k)
                        cpt.table[r * width + k] /= sum;
            }
        }
        for (std::size_t v = 0; v < variables.size(); ++v)
            if (! have[v])
                throw ParseError("variable " + variables[v].name + " has no CPT");

        BayesNet net(std::move(variables), std::move(cpts));
        auto violations = validate_network(net);
        if (! violations.empty())
            throw ParseError(violations.front().message);
        return net;
    }
    catch (const nlohmann::json::exception & e) {
        throw ParseError(std::string("malformed network JSON: ") + e.what());
    }
}

std::vector<double> random_row(std::size_t width, double zero_fraction, std::mt19937_64 & rng)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::bernoulli_distribution zero(zero_fraction);
    std::vector<double> row(width);
    while (true) {
        double sum = 0.0;
        for (auto & x : row) {
            x = unit(rng);
            // uniform_real_distribution may return 0; keep draws strictly positive
            if (x == 0.0)
                x = 0.5;
            sum += x;
        }
        for (auto & x : row)
            x /= sum;
        if (zero_fraction > 0.0)
            for (auto & x : row)
                if (zero(rng))
                    x = 0.0;
        sum = 0.0;
        for (double x : row)
            sum += x;
        if (sum == 0.0)
            continue;
        for (auto & x : row)
            x /= sum;
        return row;
    }
}

BayesNet chain_like(std::size_t chains, std::size_t length, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::vector<Variable> variables;
    std::vector<Cpt> cpts;
    for (std::size_t c = 0; c < chains; ++c)
        for (std::size_t i = 0; i < length; ++i) {
            const auto id = static_cast<VarId>(variables.size());
            std::string prefix = chains == 1 ? "X" : std::string(1, static_cast<char>('X' + c));
            variables.push_back({prefix + std::to_string(i), {"s0", "s1"}});
            Cpt cpt;
            cpt.child = id;
            if (i > 0)
                cpt.parents.push_back(id - 1);
            for (std::size_t r = 0; r < (i > 0 ? 2u : 1u); ++r) {
                auto row = random_row(2, 0.0, rng);
                cpt.table.insert(cpt.table.end(), row.begin(), row.end());
            }
            cpts.push_back(std::move(cpt));
        }
    return BayesNet(std::move(variables), std::move(cpts));
}

std::string join_numbers(const std::vector<double> & xs)
{
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i > 0)
            out += ',';
        out += format_number(xs[i]);
    }
    return out;
}

} // namespace

BayesNet parse_network(const NetworkSource & source, const ParseOptions & options)
{
    if (source.format == NetworkFormat::json)
        return parse_json(source.payload, options);
    return BifParser(source.payload, options).parse();
}

BayesNet load_network(const std::string & path, const ParseOptions & options)
{
    std::ifstream in(path);
    if (! in)
        throw Error("cannot open network file " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const bool json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
    return parse_network({json ? NetworkFormat::json : NetworkFormat::bif, buffer.str()}, options);
}

std::string write_bif(const BayesNet & net, std::string_view name)
{
    std::ostringstream os;
    os << "network " << name << " {\n}\n";
    for (const auto & var : net.variables()) {
        os << "variable " << var.name << " {\n  type discrete [ " << var.domain.size() << " ] { ";
        for (std::size_t i = 0; i < var.domain.size(); ++i)
            os << (i ? ", " : "") << var.domain[i];
        os << " };\n}\n";
    }
    for (std::size_t c = 0; c < net.size(); ++c) {
        const auto id = static_cast<VarId>(c);
        const auto & cpt = net.cpt(id);
        os << "probability ( " << net.variable(id).name;
        for (std::size_t i = 0; i < cpt.parents.size(); ++i)
            os << (i ? ", " : " | ") << net.variable(cpt.parents[i]).name;
        os << " ) {\n";
        const auto width = static_cast<std::size_t>(net.domain_size(id));
        const auto rows = net.row_count(id);
        std::vector<int> digits(cpt.parents.size(), 0);
        for (std::size_t r = 0; r < rows; ++r) {
            std::vector<double> row(cpt.table.begin() + static_cast<std::ptrdiff_t>(r * width),
                                    cpt.table.begin() + static_cast<std::ptrdiff_t>((r + 1) * width));
            if (cpt.parents.empty())
                os << "  table ";
            else {
                os << "  (";
                for (std::size_t i = 0; i < digits.size(); ++i)
                    os << (i ? ", " : "") << net.variable(cpt.parents[i]).domain[static_cast<std::size_t>(digits[i])];
                os << ") ";
            }
            for (std::size_t k = 0; k < row.size(); ++k)
                os << (k ? ", " : "") << format_number(row[k]);
            os << ";\n";
            for (std::size_t i = digits.size(); i-- > 0;) {
                if (++digits[i] < net.domain_size(cpt.parents[i]))
                    break;
                digits[i] = 0;
            }
        }
        os << "}\n";
    }
    return os.str();
}

std::string write_json(const BayesNet & net)
{
    nlohmann::json doc;
    doc["variables"] = nlohmann::json::array();
    for (const auto & var : net.variables())
        doc["variables"].push_back({{"name", var.name}, {"values", var.domain}});
    doc["cpts"] = nlohmann::json::array();
    for (std::size_t c = 0; c < net.size(); ++c) {
        const auto & cpt = net.cpt(static_cast<VarId>(c));
        std::vector<std::string> parents;
        for (VarId p : cpt.parents)
            parents.push_back(net.variable(p).name);
        doc["cpts"].push_back(
            {{"child", net.variable(static_cast<VarId>(c)).name}, {"parents", parents}, {"table", cpt.table}});
    }
    return doc.dump(2) + "\n";
}

BayesNet random_network(std::size_t n_vars, std::size_t max_parents, int max_domain, double zero_fraction,
                        std::uint64_t seed)
{
    if (n_vars < 1)
        throw std::invalid_argument("random_network needs at least one variable");
    if (max_domain < 2)
        throw std::invalid_argument("random_network needs max_domain >= 2");
    if (! (zero_fraction >= 0.0 && zero_fraction < 1.0))
        throw std::invalid_argument("zero_fraction must lie in [0, 1)");

    std::mt19937_64 rng(seed);
    std::vector<Variable> variables;
    std::vector<Cpt> cpts;
    for (std::size_t i = 0; i < n_vars; ++i) {
        const int size = std::uniform_int_distribution<int>(2, max_domain)(rng);
        Variable var{"X" + std::to_string(i), {}};
        for (int k = 0; k < size; ++k)
            var.domain.push_back("s" + std::to_string(k));
        variables.push_back(std::move(var));

        Cpt cpt;
        cpt.child = static_cast<VarId>(i);
        const auto parent_cap = std::min(max_parents, i);
        const auto count = std::uniform_int_distribution<std::size_t>(0, parent_cap)(rng);
        std::vector<VarId> pool(i);
        for (std::size_t k = 0; k < i; ++k)
            pool[k] = static_cast<VarId>(k);
        std::shuffle(pool.begin(), pool.end(), rng);
        cpt.parents.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(count));
        std::sort(cpt.parents.begin(), cpt.parents.end());

        std::size_t rows = 1;
        for (VarId p : cpt.parents)
            rows *= variables[static_cast<std::size_t>(p)].domain.size();
        for (std::size_t r = 0; r < rows; ++r) {
            auto row = random_row(static_cast<std::size_t>(size), zero_fraction, rng);
            cpt.table.insert(cpt.table.end(), row.begin(), row.end());
        }
        cpts.push_back(std::move(cpt));
    }
    return BayesNet(std::move(variables), std::move(cpts));
}

BayesNet chain_network(std::size_t n, std::uint64_t seed)
{
    return chain_like(1, n, seed);
}

BayesNet disjoint_chains(std::size_t k, std::uint64_t seed)
{
    return chain_like(2, k, seed);
}

std::string emit_result(const ResultRecord & r)
{
    std::ostringstream os;
    char wall[32];
    std::snprintf(wall, sizeof wall, "%.3f", r.stats.wall_ms);
    os << "engine=" << r.engine << "\tordering=" << r.ordering << "\tquery=" << r.query
       << "\tposterior=" << (r.zero_evidence ? std::string("evidence_probability_zero") : join_numbers(r.posterior))
       << "\tnodes=" << r.stats.nodes << "\tcpt_evals=" << r.stats.cpt_evals
       << "\tfactors_cached=" << r.stats.factors_cached << "\tcache_hits=" << r.stats.cache_hits
       << "\tnogoods=" << r.stats.nogoods << "\tpurges=" << r.stats.purges << "\twall_ms=" << wall
       << "\tzero_evidence=" << (r.zero_evidence ? 1 : 0);
    return os.str();
}

std::string emit_result_without_timing(ResultRecord record)
{
    record.stats.wall_ms = 0.0;
    return emit_result(record);
}

ResultRecord parse_result(std::string_view line)
{
    std::map<std::string, std::string, std::less<>> fields;
    std::size_t start = 0;
    while (start <= line.size()) {
        auto end = line.find('\t', start);
        if (end == std::string_view::npos)
            end = line.size();
        auto field = line.substr(start, end - start);
        auto eq = field.find('=');
        if (eq == std::string_view::npos)
            throw ParseError("result field without '=': " + std::string(field));
        fields.emplace(std::string(field.substr(0, eq)), std::string(field.substr(eq + 1)));
        start = end + 1;
    }
    auto get = [&](const char * key) -> const std::string & {
        auto it = fields.find(key);
        if (it == fields.end())
            throw ParseError(std::string("result line lacks key ") + key);
        return it->second;
    };
    auto get_u64 = [&](const char * key) {
        const auto & s = get(key);
        std::uint64_t x = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
        if (ec != std::errc() || ptr != s.data() + s.size())
            throw ParseError(std::string("bad integer for ") + key);
        return x;
    };

    ResultRecord r;
    r.engine = get("engine");
    r.ordering = get("ordering");
    r.query = get("query");
    r.zero_evidence = get_u64("zero_evidence") != 0;
    const auto & posterior = get("posterior");
    if (! r.zero_evidence && ! posterior.empty()) {
        std::size_t s = 0;
        while (s <= posterior.size()) {
            auto e = posterior.find(',', s);
            if (e == std::string::npos)
                e = posterior.size();
            r.posterior.push_back(std::stod(posterior.substr(s, e - s)));
            s = e + 1;
        }
    }
    r.stats.nodes = get_u64("nodes");
    r.stats.cpt_evals = get_u64("cpt_evals");
    r.stats.factors_cached = get_u64("factors_cached");
    r.stats.cache_hits = get_u64("cache_hits");
    r.stats.nogoods = get_u64("nogoods");
    r.stats.purges = get_u64("purges");
    r.stats.wall_ms = std::stod(get("wall_ms"));
    return r;
}

} // namespace valelim
