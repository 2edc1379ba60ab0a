#include "skyshard/query.hpp"

#include <cctype>
#include <charconv>

namespace skyshard {

std::string_view op_text(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return "=";
    case CompareOp::Ne: return "!=";
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
  }
  return "?";
}

Predicate Predicate::compare(std::string column, CompareOp op, Value literal) {
  Predicate p;
  p.kind = Kind::Compare;
  p.column = std::move(column);
  p.op = op;
  p.literal = std::move(literal);
  return p;
}

Predicate Predicate::all_of(std::vector<Predicate> children) {
  if (children.empty()) return always();
  if (children.size() == 1) return std::move(children.front());
  Predicate p;
  p.kind = Kind::And;
  p.children = std::move(children);
  return p;
}

Predicate Predicate::any_of(std::vector<Predicate> children) {
  if (children.empty()) return negate(always());
  if (children.size() == 1) return std::move(children.front());
  Predicate p;
  p.kind = Kind::Or;
  p.children = std::move(children);
  return p;
}

Predicate Predicate::negate(Predicate child) {
  Predicate p;
  p.kind = Kind::Not;
  p.children.push_back(std::move(child));
  return p;
}

// ---------------------------------------------------------------------------
// Text rendering

namespace {

bool plain_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  }
  return true;
}

bool is_keyword(std::string_view s);

std::string render_ident(std::string_view s) {
  if (plain_identifier(s) && !is_keyword(s)) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string render_number(double v) {
  std::string s = format_double(v);
  if (s.find_first_of(".en") == std::string::npos) s += ".0";
  return s;
}

std::string render_literal(const Value& v) {
  switch (type_of(v)) {
    case ColumnType::Int64: return std::to_string(std::get<std::int64_t>(v));
    case ColumnType::Float64: return render_number(std::get<double>(v));
    case ColumnType::Utf8: {
      std::string out = "'";
      for (char c : std::get<std::string>(v)) {
        if (c == '\'') out += '\'';
        out += c;
      }
      return out + "'";
    }
  }
  return {};
}

void render(const Predicate& p, std::string& out) {
  using K = Predicate::Kind;
  switch (p.kind) {
    case K::True: out += "TRUE"; return;
    case K::Compare:
      out += render_ident(p.column);
      out += ' ';
      out += op_text(p.op);
      out += ' ';
      out += render_literal(p.literal);
      return;
    case K::And:
    case K::Or: {
      out += '(';
      for (std::size_t i = 0; i < p.children.size(); ++i) {
        if (i) out += p.kind == K::And ? " AND " : " OR ";
        render(p.children[i], out);
      }
      out += ')';
      return;
    }
    case K::Not:
      out += "NOT (";
      render(p.children.at(0), out);
      out += ')';
      return;
  }
}

}  // namespace

std::string to_text(const Predicate& p) {
  std::string out;
  render(p, out);
  return out;
}

// ---------------------------------------------------------------------------
// Binding and evaluation

Predicate bind(const Predicate& p, const Schema& schema) {
  using K = Predicate::Kind;
  if (p.kind != K::Compare) {
    Predicate out = p;
    for (auto& c : out.children) c = bind(c, schema);
    return out;
  }
  auto idx = schema.index_of(p.column);
  ColumnType col = schema[idx].type;
  ColumnType lit = type_of(p.literal);
  Predicate out = p;
  auto mismatch = [&] {
    fail(ErrorCode::TypeMismatch, "literal " + render_literal(p.literal) + " does not match column '" + p.column +
                                      "' of type " + std::string(type_name(col)));
  };
  switch (col) {
    case ColumnType::Int64:
      if (lit != ColumnType::Int64) mismatch();
      break;
    case ColumnType::Float64:
      if (lit == ColumnType::Int64) {
        out.literal = static_cast<double>(std::get<std::int64_t>(p.literal));
      } else if (lit != ColumnType::Float64) {
        mismatch();
      }
      break;
    case ColumnType::Utf8:
      if (lit != ColumnType::Utf8) mismatch();
      if (p.op != CompareOp::Eq && p.op != CompareOp::Ne) {
        fail(ErrorCode::TypeMismatch, "only = and != apply to utf8 column '" + p.column + "'");
      }
      break;
  }
  return out;
}

namespace {

template <class T>
bool apply(CompareOp op, const T& a, const T& b) {
  switch (op) {
    case CompareOp::Eq: return a == b;
    case CompareOp::Ne: return a != b;
    case CompareOp::Lt: return a < b;
    case CompareOp::Le: return a <= b;
    case CompareOp::Gt: return a > b;
    case CompareOp::Ge: return a >= b;
  }
  return false;
}

}  // namespace

RowMatcher::RowMatcher(const Predicate& bound, const Table& table)
    : table_(&table), root_(compile(bound, table.schema())) {}

RowMatcher::Node RowMatcher::compile(const Predicate& p, const Schema& schema) {
  Node n;
  n.kind = p.kind;
  if (p.kind == Predicate::Kind::Compare) {
    n.column = schema.index_of(p.column);
    n.op = p.op;
    n.literal = p.literal;
  }
  for (const auto& c : p.children) n.children.push_back(compile(c, schema));
  return n;
}

bool RowMatcher::eval(const Node& n, std::size_t row) const {
  using K = Predicate::Kind;
  switch (n.kind) {
    case K::True: return true;
    case K::Compare:
      return std::visit([&](const auto& vec) {
        using T = typename std::decay_t<decltype(vec)>::value_type;
        return apply(n.op, vec[row], std::get<T>(n.literal));
      }, table_->column(n.column));
    case K::And:
      for (const auto& c : n.children) {
        if (!eval(c, row)) return false;
      }
      return true;
    case K::Or:
      for (const auto& c : n.children) {
        if (eval(c, row)) return true;
      }
      return false;
    case K::Not: return !eval(n.children.at(0), row);
  }
  return false;
}

bool RowMatcher::operator()(std::size_t row) const { return eval(root_, row); }

std::vector<std::uint32_t> filter_rows(const Predicate& bound, const Table& table) {
  std::vector<std::uint32_t> out;
  if (bound.kind == Predicate::Kind::True) {
    out.resize(table.num_rows());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<std::uint32_t>(i);
    return out;
  }
  RowMatcher m(bound, table);
  for (std::size_t r = 0; r < table.num_rows(); ++r) {
    if (m(r)) out.push_back(static_cast<std::uint32_t>(r));
  }
  return out;
}

namespace {

// Three-way compare of two numeric values of the same type.
int compare_numeric(const Value& a, const Value& b) {
  return std::visit([&](const auto& x) -> int {
    using T = std::decay_t<decltype(x)>;
    if constexpr (std::is_same_v<T, std::string>) {
      return 0;
    } else {
      const T& y = std::get<T>(b);
      return x < y ? -1 : (y < x ? 1 : 0);
    }
  }, a);
}

const ZoneEntry* zone_for(const Predicate& p, const Schema& schema, const ZoneMap& zm) {
  auto idx = schema.find(p.column);
  if (!idx || *idx >= zm.size() || !zm[*idx] || !is_numeric(schema[*idx].type)) return nullptr;
  if (type_of(p.literal) != schema[*idx].type) return nullptr;
  return &*zm[*idx];
}

bool all_rows_match(const Predicate& p, const Schema& schema, const ZoneMap& zm);

// No row in [min, max] can satisfy p.
bool no_row_matches(const Predicate& p, const Schema& schema, const ZoneMap& zm) {
  using K = Predicate::Kind;
  switch (p.kind) {
    case K::True: return false;
    case K::Compare: {
      const ZoneEntry* z = zone_for(p, schema, zm);
      if (!z) return false;
      int lo = compare_numeric(z->min, p.literal);  // sign(min - L)
      int hi = compare_numeric(z->max, p.literal);  // sign(max - L)
      switch (p.op) {
        case CompareOp::Eq: return lo > 0 || hi < 0;
        case CompareOp::Ne: return lo == 0 && hi == 0;
        case CompareOp::Lt: return lo >= 0;
        case CompareOp::Le: return lo > 0;
        case CompareOp::Gt: return hi <= 0;
        case CompareOp::Ge: return hi < 0;
      }
      return false;
    }
    case K::And:
      for (const auto& c : p.children) {
        if (no_row_matches(c, schema, zm)) return true;
      }
      return false;
    case K::Or:
      for (const auto& c : p.children) {
        if (!no_row_matches(c, schema, zm)) return false;
      }
      return true;
    case K::Not: return all_rows_match(p.children.at(0), schema, zm);
  }
  return false;
}

// Every value in [min, max] satisfies p.
bool all_rows_match(const Predicate& p, const Schema& schema, const ZoneMap& zm) {
  using K = Predicate::Kind;
  switch (p.kind) {
    case K::True: return true;
    case K::Compare: {
      const ZoneEntry* z = zone_for(p, schema, zm);
      if (!z) return false;
      int lo = compare_numeric(z->min, p.literal);
      int hi = compare_numeric(z->max, p.literal);
      switch (p.op) {
        case CompareOp::Eq: return lo == 0 && hi == 0;
        case CompareOp::Ne: return lo > 0 || hi < 0;
        case CompareOp::Lt: return hi < 0;
        case CompareOp::Le: return hi <= 0;
        case CompareOp::Gt: return lo > 0;
        case CompareOp::Ge: return lo >= 0;
      }
      return false;
    }
    case K::And:
      for (const auto& c : p.children) {
        if (!all_rows_match(c, schema, zm)) return false;
      }
      return true;
    case K::Or:
      for (const auto& c : p.children) {
        if (all_rows_match(c, schema, zm)) return true;
      }
      return false;
    case K::Not: return no_row_matches(p.children.at(0), schema, zm);
  }
  return false;
}

}  // namespace

bool zone_map_excludes(const Predicate& bound, const Schema& schema, const ZoneMap& zone_map) {
  return no_row_matches(bound, schema, zone_map);
}

std::vector<const Predicate*> equality_conjuncts(const Predicate& p) {
  std::vector<const Predicate*> out;
  if (p.kind == Predicate::Kind::Compare && p.op == CompareOp::Eq) {
    out.push_back(&p);
  } else if (p.kind == Predicate::Kind::And) {
    for (const auto& c : p.children) {
      auto sub = equality_conjuncts(c);
      out.insert(out.end(), sub.begin(), sub.end());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Aggregates, projections

std::string_view agg_name(AggFn fn) {
  switch (fn) {
    case AggFn::Count: return "count";
    case AggFn::Sum: return "sum";
    case AggFn::Min: return "min";
    case AggFn::Max: return "max";
    case AggFn::Avg: return "avg";
    case AggFn::Median: return "median";
    case AggFn::MedianApprox: return "median_approx";
  }
  return "?";
}

std::optional<AggFn> parse_agg_name(std::string_view s) {
  std::string lower;
  for (char c : s) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (auto fn : {AggFn::Count, AggFn::Sum, AggFn::Min, AggFn::Max, AggFn::Avg, AggFn::Median, AggFn::MedianApprox}) {
    if (agg_name(fn) == lower) return fn;
  }
  return std::nullopt;
}

std::vector<std::size_t> Projection::resolve(const Schema& schema) const {
  std::vector<std::size_t> out;
  if (all) {
    for (std::size_t i = 0; i < schema.size(); ++i) out.push_back(i);
    return out;
  }
  for (const auto& c : columns) out.push_back(schema.index_of(c));
  return out;
}

// ---------------------------------------------------------------------------
// Lexer / parser

namespace {

enum class Tok { Ident, QuotedIdent, Integer, Decimal, String, Symbol, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

constexpr std::string_view kKeywords[] = {"select", "from", "where", "and", "or", "not", "bins", "range", "true"};

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) != std::tolower(static_cast<unsigned char>(b[i]))) return false;
  }
  return true;
}

bool is_keyword(std::string_view s) {
  for (auto k : kKeywords) {
    if (iequals(s, k)) return true;
  }
  return false;
}

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto digit = [&](std::size_t k) { return k < s.size() && std::isdigit(static_cast<unsigned char>(s[k])); };
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
      out.push_back({Tok::Ident, std::string(s.substr(start, i - start)), start});
    } else if (digit(i) || (c == '-' && (digit(i + 1) || (i + 1 < s.size() && s[i + 1] == '.' && digit(i + 2)))) ||
               (c == '.' && digit(i + 1))) {
      bool decimal = false;
      if (c == '-') ++i;
      while (digit(i)) ++i;
      if (i < s.size() && s[i] == '.') {
        decimal = true;
        ++i;
        while (digit(i)) ++i;
      }
      if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
        if (digit(j)) {
          decimal = true;
          i = j;
          while (digit(i)) ++i;
        }
      }
      out.push_back({decimal ? Tok::Decimal : Tok::Integer, std::string(s.substr(start, i - start)), start});
    } else if (c == '\'' || c == '"') {
      std::string text;
      ++i;
      bool closed = false;
      while (i < s.size()) {
        if (s[i] == c) {
          if (i + 1 < s.size() && s[i + 1] == c) {
            text += c;
            i += 2;
            continue;
          }
          ++i;
          closed = true;
          break;
        }
        text += s[i++];
      }
      if (!closed) throw ParseError(start, "unterminated quoted text");
      out.push_back({c == '\'' ? Tok::String : Tok::QuotedIdent, std::move(text), start});
    } else {
      std::string_view two = s.substr(i, 2);
      if (two == "<=" || two == ">=" || two == "!=" || two == "<>") {
        out.push_back({Tok::Symbol, std::string(two), start});
        i += 2;
      } else if (std::string_view("=<>(),*").find(c) != std::string_view::npos) {
        out.push_back({Tok::Symbol, std::string(1, c), start});
        ++i;
      } else {
        throw ParseError(start, std::string("unexpected character '") + c + "'");
      }
    }
  }
  out.push_back({Tok::End, "", s.size()});
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(lex(text)) {}

  ParsedQuery parse() {
    ParsedQuery out;
    expect_keyword("select");
    if (peek_symbol("*")) {
      next();
      out.query.projection = Projection::star();
    } else if (peek().kind == Tok::Ident && !is_keyword(peek().text) && toks_[pos_ + 1].kind == Tok::Symbol &&
               toks_[pos_ + 1].text == "(") {
      const Token& fn_tok = next();
      auto fn = parse_agg_name(fn_tok.text);
      if (!fn) throw ParseError(fn_tok.pos, "unknown aggregate function '" + fn_tok.text + "'");
      next();  // (
      AggSpec spec;
      spec.fn = *fn;
      spec.column = ident("column name");
      expect_symbol(")");
      if (peek_keyword("bins")) {
        const Token& kw = next();
        if (spec.fn != AggFn::MedianApprox) throw ParseError(kw.pos, "BINS only applies to median_approx");
        const Token& n = next();
        std::int64_t bins = 0;
        if (n.kind != Tok::Integer || !parse_int(n.text, bins) || bins <= 0 || bins > (1 << 24)) {
          throw ParseError(n.pos, "BINS expects a positive integer");
        }
        spec.bins = static_cast<std::uint32_t>(bins);
        if (peek_keyword("range")) {
          next();
          double lo = number("RANGE lower bound");
          double hi = number("RANGE upper bound");
          out.histogram = HistogramParams{lo, hi, spec.bins};
        }
      }
      out.query.aggregate = spec;
    } else {
      std::vector<std::string> cols{ident("column name or '*'")};
      while (peek_symbol(",")) {
        next();
        cols.push_back(ident("column name"));
      }
      out.query.projection = Projection::of(std::move(cols));
    }
    expect_keyword("from");
    const Token& ds = peek();
    out.query.dataset = ident("dataset name");
    if (!valid_dataset_name(out.query.dataset)) throw ParseError(ds.pos, "invalid dataset name");
    if (peek_keyword("where")) {
      next();
      out.query.predicate = or_expr();
    }
    if (peek().kind != Tok::End) throw ParseError(peek().pos, "unexpected '" + peek().text + "'");
    return out;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool peek_keyword(std::string_view kw) const { return peek().kind == Tok::Ident && iequals(peek().text, kw); }
  bool peek_symbol(std::string_view s) const { return peek().kind == Tok::Symbol && peek().text == s; }

  void expect_keyword(std::string_view kw) {
    if (!peek_keyword(kw)) throw ParseError(peek().pos, "expected " + upper(kw));
    next();
  }
  void expect_symbol(std::string_view s) {
    if (!peek_symbol(s)) throw ParseError(peek().pos, "expected '" + std::string(s) + "'");
    next();
  }
  static std::string upper(std::string_view s) {
    std::string out;
    for (char c : s) out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
  }

  std::string ident(const char* what) {
    const Token& t = peek();
    if (t.kind == Tok::QuotedIdent || (t.kind == Tok::Ident && !is_keyword(t.text))) {
      next();
      return t.text;
    }
    throw ParseError(t.pos, std::string("expected ") + what);
  }

  static bool parse_int(const std::string& s, std::int64_t& out) {
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc{} && res.ptr == s.data() + s.size();
  }

  double number(const char* what) {
    const Token& t = next();
    if (t.kind != Tok::Integer && t.kind != Tok::Decimal) throw ParseError(t.pos, std::string("expected ") + what);
    double v = 0;
    std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    return v;
  }

  Predicate or_expr() {
    std::vector<Predicate> parts{and_expr()};
    while (peek_keyword("or")) {
      next();
      parts.push_back(and_expr());
    }
    if (parts.size() == 1) return std::move(parts.front());
    Predicate p;
    p.kind = Predicate::Kind::Or;
    p.children = std::move(parts);
    return p;
  }

  Predicate and_expr() {
    std::vector<Predicate> parts{not_expr()};
    while (peek_keyword("and")) {
      next();
      parts.push_back(not_expr());
    }
    if (parts.size() == 1) return std::move(parts.front());
    Predicate p;
    p.kind = Predicate::Kind::And;
    p.children = std::move(parts);
    return p;
  }

  Predicate not_expr() {
    if (peek_keyword("not")) {
      next();
      return Predicate::negate(not_expr());
    }
    return primary();
  }

  Predicate primary() {
    if (peek_symbol("(")) {
      next();
      Predicate p = or_expr();
      expect_symbol(")");
      return p;
    }
    if (peek_keyword("true")) {
      next();
      return Predicate::always();
    }
    std::string col = ident("column name");
    const Token& op_tok = next();
    CompareOp op;
    if (op_tok.kind != Tok::Symbol) throw ParseError(op_tok.pos, "expected comparison operator");
    if (op_tok.text == "=") {
      op = CompareOp::Eq;
    } else if (op_tok.text == "!=" || op_tok.text == "<>") {
      op = CompareOp::Ne;
    } else if (op_tok.text == "<") {
      op = CompareOp::Lt;
    } else if (op_tok.text == "<=") {
      op = CompareOp::Le;
    } else if (op_tok.text == ">") {
      op = CompareOp::Gt;
    } else if (op_tok.text == ">=") {
      op = CompareOp::Ge;
    } else {
      throw ParseError(op_tok.pos, "expected comparison operator");
    }
    const Token& lit = next();
    Value v;
    switch (lit.kind) {
      case Tok::Integer: {
        std::int64_t i = 0;
        if (!parse_int(lit.text, i)) throw ParseError(lit.pos, "integer literal out of range");
        v = i;
        break;
      }
      case Tok::Decimal: {
        double d = 0;
        auto res = std::from_chars(lit.text.data(), lit.text.data() + lit.text.size(), d);
        if (res.ec != std::errc{}) throw ParseError(lit.pos, "bad decimal literal");
        v = d;
        break;
      }
      case Tok::String: v = lit.text; break;
      default: throw ParseError(lit.pos, "expected literal");
    }
    return Predicate::compare(std::move(col), op, std::move(v));
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

std::string select_list(const Projection& proj, const std::optional<AggSpec>& agg) {
  if (agg) {
    std::string out = std::string(agg_name(agg->fn)) + "(" + render_ident(agg->column) + ")";
    if (agg->fn == AggFn::MedianApprox) out += " BINS " + std::to_string(agg->bins);
    return out;
  }
  if (proj.all) return "*";
  std::string out;
  for (std::size_t i = 0; i < proj.columns.size(); ++i) {
    if (i) out += ", ";
    out += render_ident(proj.columns[i]);
  }
  return out;
}

}  // namespace

ParsedQuery parse_query_text(std::string_view text) { return Parser(text).parse(); }

Query parse_query(std::string_view text) {
  auto parsed = parse_query_text(text);
  if (parsed.histogram) throw ParseError(0, "RANGE is reserved for sub-queries");
  return std::move(parsed.query);
}

std::string to_text(const Query& q) {
  std::string out = "SELECT " + select_list(q.projection, q.aggregate) + " FROM " + render_ident(q.dataset);
  if (q.predicate.kind != Predicate::Kind::True) out += " WHERE " + to_text(q.predicate);
  return out;
}

std::string to_text(const SubQuery& sq, std::string_view dataset) {
  std::optional<AggSpec> agg = sq.aggregate;
  if (agg && sq.histogram) agg->bins = sq.histogram->bins;
  std::string out = "SELECT " + select_list(sq.projection, agg);
  if (agg && agg->fn == AggFn::MedianApprox && sq.histogram) {
    out += " RANGE " + render_number(sq.histogram->lo) + " " + render_number(sq.histogram->hi);
  }
  out += " FROM " + render_ident(dataset);
  if (sq.predicate.kind != Predicate::Kind::True) out += " WHERE " + to_text(sq.predicate);
  return out;
}

std::pair<std::string, SubQuery> parse_sub_query(std::string_view text) {
  auto parsed = parse_query_text(text);
  SubQuery sq;
  sq.projection = std::move(parsed.query.projection);
  sq.predicate = std::move(parsed.query.predicate);
  sq.aggregate = std::move(parsed.query.aggregate);
  sq.histogram = parsed.histogram;
  return {std::move(parsed.query.dataset), std::move(sq)};
}

}  // namespace skyshard
