#include "refinery/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace refinery {

namespace {

constexpr std::size_t kMaxDiagnostics = 200;

struct Token {
  enum class Kind { word, punct, eof };
  Kind kind = Kind::eof;
  std::string text;
  int line = 1;
  int column = 1;
};

bool word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' ||
         c == '/';
}

bool plain_identifier(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return true;
}

std::vector<Token> tokenize(std::string_view src,
                            std::vector<ParseDiagnostic>& diags) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1, column = 1;
  if (src.size() >= 3 && static_cast<unsigned char>(src[0]) == 0xEF &&
      static_cast<unsigned char>(src[1]) == 0xBB &&
      static_cast<unsigned char>(src[2]) == 0xBF)
    i = 3;  // UTF-8 BOM

  auto advance = [&](char c) {
    if (c == '\n') { ++line; column = 1; } else { ++column; }
  };

  while (i < src.size() && diags.size() < kMaxDiagnostics) {
    char c = src[i];
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') { advance(src[i]); ++i; }
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v') {
      advance(c);
      ++i;
      continue;
    }
    const int tl = line, tc = column;
    if (word_char(c)) {
      std::size_t j = i;
      while (j < src.size() && word_char(src[j])) ++j;
      if (j < src.size() && src[j] == '\'') ++j;  // primed name
      std::string text(src.substr(i, j - i));
      while (i < j) { advance(src[i]); ++i; }
      out.push_back({Token::Kind::word, std::move(text), tl, tc});
      continue;
    }
    if (c == '{' || c == '}' || c == '[' || c == ']' || c == '|' || c == ';' ||
        c == ',' || c == '=' || c == ':') {
      out.push_back({Token::Kind::punct, std::string(1, c), tl, tc});
      advance(c);
      ++i;
      continue;
    }
    if (c == '-' && i + 1 < src.size() && src[i + 1] == '>') {
      out.push_back({Token::Kind::punct, "->", tl, tc});
      advance(src[i]); advance(src[i + 1]);
      i += 2;
      continue;
    }
    if (c == '<' && i + 2 < src.size() && src[i + 1] == '-' && src[i + 2] == '>') {
      out.push_back({Token::Kind::punct, "<->", tl, tc});
      advance(src[i]); advance(src[i + 1]); advance(src[i + 2]);
      i += 3;
      continue;
    }
    std::string shown = std::isprint(static_cast<unsigned char>(c))
                            ? "'" + std::string(1, c) + "'"
                            : "byte " + std::to_string(static_cast<unsigned char>(c));
    diags.push_back({ParseDiagnostic::Severity::error, tl, tc,
                     "unexpected character " + shown});
    advance(c);
    ++i;
  }
  out.push_back({Token::Kind::eof, "", line, column});
  return out;
}

// ---- raw, unresolved block structures ----

struct RawRef {
  std::string text;
  int line = 1, column = 1;
};

struct RawAssign {
  std::string name;  // without prime
  bool primed = false;
  RawRef value;
  int line = 1, column = 1;
};

struct RawRow {
  std::vector<RawAssign> lhs, rhs;
  int line = 1, column = 1;
};

struct RawSlot {
  SlotKind kind = SlotKind::state;
  std::string name;
  RawRef type;
  int line = 1, column = 1;
};

struct RawDistEntry {
  RawRef weight;
  std::vector<RawAssign> assigns;
};

struct RawDistBlock {
  std::vector<RawDistEntry> entries;
  int line = 1, column = 1;
};

struct RawProbRow {
  std::vector<RawAssign> lhs;
  std::vector<RawDistBlock> blocks;
  int line = 1, column = 1;
};

struct RawBlock {
  enum class Kind { type, subtype, op, transformer, prob, noise, datatype, retrieve };
  Kind kind = Kind::type;
  std::string name;
  int line = 1, column = 1;

  std::vector<RawRef> values;  // type/subtype values, datatype init
  RawRef parent;               // subtype
  std::vector<RawSlot> slots;
  std::vector<RawRow> rows;            // op trans / transformer rel
  std::vector<RawProbRow> prob_rows;   // prob dist
  RawRef signal_type, noise_type;      // noise
  std::vector<std::array<RawRef, 3>> noise_rows;
  RawRef state_type;                   // datatype
  bool has_init = false;
  std::vector<RawRef> op_refs;         // datatype
  RawRef abstract_type, concrete_type;  // retrieve
  std::vector<std::pair<RawRef, RawRef>> retrieve_pairs;
};

const std::set<std::string> kTopKeywords = {
    "type", "subtype", "op", "transformer", "prob",
    "noise", "datatype", "retrieve"};

class Parser {
 public:
  explicit Parser(std::string_view src) : source_(src) {
    tokens_ = tokenize(src, diags_);
  }

  ParseResult run();

 private:
  std::string_view source_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::vector<ParseDiagnostic> diags_;

  bool capped() const { return diags_.size() >= kMaxDiagnostics; }

  const Token& peek() const { return tokens_[pos_]; }
  const Token& take() {
    const Token& t = tokens_[pos_];
    if (pos_ + 1 < tokens_.size()) ++pos_;
    return t;
  }

  void error_at(int line, int column, std::string message) {
    if (!capped())
      diags_.push_back({ParseDiagnostic::Severity::error, line, column,
                        std::move(message)});
  }
  void error_here(std::string message) {
    error_at(peek().line, peek().column, std::move(message));
  }

  bool at_punct(const char* p) const {
    return peek().kind == Token::Kind::punct && peek().text == p;
  }
  bool at_word(const char* w) const {
    return peek().kind == Token::Kind::word && peek().text == w;
  }
  bool accept_punct(const char* p) {
    if (!at_punct(p)) return false;
    take();
    return true;
  }
  bool expect_punct(const char* p) {
    if (accept_punct(p)) return true;
    error_here(std::string("expected '") + p + "'");
    return false;
  }
  std::optional<RawRef> expect_identifier(const char* what) {
    if (peek().kind != Token::Kind::word || !plain_identifier(peek().text)) {
      error_here(std::string("expected ") + what);
      return std::nullopt;
    }
    const Token& t = take();
    return RawRef{t.text, t.line, t.column};
  }

  void skip_to_top_level() {
    int depth = 0;
    while (peek().kind != Token::Kind::eof) {
      if (peek().kind == Token::Kind::punct) {
        if (peek().text == "{") ++depth;
        if (peek().text == "}" && depth > 0) --depth;
      } else if (depth == 0 && kTopKeywords.contains(peek().text)) {
        return;
      }
      take();
    }
  }

  // skip a malformed row: to the next ';' (consumed) or '}' (left in place)
  void skip_row() {
    while (peek().kind != Token::Kind::eof) {
      if (at_punct(";")) { take(); return; }
      if (at_punct("}")) return;
      take();
    }
  }

  bool parse_assign(RawAssign& out) {
    if (peek().kind != Token::Kind::word) {
      error_here("expected slot assignment");
      return false;
    }
    Token name = take();
    out.line = name.line;
    out.column = name.column;
    out.primed = !name.text.empty() && name.text.back() == '\'';
    if (out.primed) name.text.pop_back();
    if (!plain_identifier(name.text)) {
      error_at(name.line, name.column, "invalid slot name " + name.text);
      return false;
    }
    out.name = std::move(name.text);
    if (!expect_punct("=")) return false;
    if (peek().kind != Token::Kind::word) {
      error_here("expected value");
      return false;
    }
    const Token& value = take();
    if (!plain_identifier(value.text)) {
      error_at(value.line, value.column, "invalid value symbol " + value.text);
      return false;
    }
    out.value = RawRef{value.text, value.line, value.column};
    return true;
  }

  bool parse_assign_list(std::vector<RawAssign>& out) {
    do {
      RawAssign a;
      if (!parse_assign(a)) return false;
      out.push_back(std::move(a));
    } while (accept_punct(","));
    return true;
  }

  bool parse_value_list(std::vector<RawRef>& out) {
    if (!expect_punct("{")) return false;
    while (peek().kind == Token::Kind::word) {
      const Token& t = take();
      if (!plain_identifier(t.text)) {
        error_at(t.line, t.column, "invalid value symbol " + t.text);
        return false;
      }
      out.push_back(RawRef{t.text, t.line, t.column});
    }
    return expect_punct("}");
  }

  bool parse_slot_clause(RawBlock& block, bool allow_state) {
    SlotKind kind;
    if (at_word("state") && allow_state) kind = SlotKind::state;
    else if (at_word("in")) kind = SlotKind::input;
    else if (at_word("out")) kind = SlotKind::output;
    else return false;
    take();
    RawSlot slot;
    slot.kind = kind;
    auto name = expect_identifier("slot name");
    if (!name) return false;
    slot.name = name->text;
    slot.line = name->line;
    slot.column = name->column;
    if (!expect_punct(":")) return false;
    auto type = expect_identifier("type name");
    if (!type) return false;
    slot.type = *type;
    block.slots.push_back(std::move(slot));
    return true;
  }

  bool parse_rows(RawBlock& block) {
    if (!expect_punct("{")) return false;
    while (!at_punct("}") && peek().kind != Token::Kind::eof && !capped()) {
      RawRow row;
      row.line = peek().line;
      row.column = peek().column;
      if (!parse_assign_list(row.lhs) ||
          !expect_punct("->") ||
          !parse_assign_list(row.rhs) ||
          !expect_punct(";")) {
        skip_row();
        continue;
      }
      block.rows.push_back(std::move(row));
    }
    return expect_punct("}");
  }

  bool parse_dist_rows(RawBlock& block) {
    if (!expect_punct("{")) return false;
    while (!at_punct("}") && peek().kind != Token::Kind::eof && !capped()) {
      RawProbRow row;
      row.line = peek().line;
      row.column = peek().column;
      bool good = parse_assign_list(row.lhs) && expect_punct("->");
      while (good && at_punct("[")) {
        RawDistBlock dist;
        dist.line = peek().line;
        dist.column = peek().column;
        take();  // '['
        do {
          RawDistEntry entry;
          if (peek().kind != Token::Kind::word) {
            error_here("expected probability weight");
            good = false;
            break;
          }
          const Token& w = take();
          entry.weight = RawRef{w.text, w.line, w.column};
          if (!expect_punct(":") || !parse_assign_list(entry.assigns)) {
            good = false;
            break;
          }
          dist.entries.push_back(std::move(entry));
        } while (accept_punct("|"));
        if (good && !expect_punct("]")) good = false;
        if (good) row.blocks.push_back(std::move(dist));
      }
      if (good && row.blocks.empty()) {
        error_here("expected '[' starting a distribution");
        good = false;
      }
      if (!good || !expect_punct(";")) {
        skip_row();
        continue;
      }
      block.prob_rows.push_back(std::move(row));
    }
    return expect_punct("}");
  }

  bool parse_schema_block(RawBlock& block, bool allow_state, const char* rows_kw) {
    if (!expect_punct("{")) return false;
    while (parse_slot_clause(block, allow_state)) {}
    if (!at_word(rows_kw)) {
      error_here(std::string("expected slot declaration or '") + rows_kw + "'");
      return false;
    }
    take();
    bool ok = block.kind == RawBlock::Kind::prob ? parse_dist_rows(block)
                                                 : parse_rows(block);
    return ok && expect_punct("}");
  }

  bool parse_noise_block(RawBlock& block) {
    if (!expect_punct("{")) return false;
    if (!at_word("signal")) { error_here("expected 'signal'"); return false; }
    take();
    auto sig = expect_identifier("type name");
    if (!sig) return false;
    block.signal_type = *sig;
    if (!at_word("noisetype")) { error_here("expected 'noisetype'"); return false; }
    take();
    auto noise = expect_identifier("type name");
    if (!noise) return false;
    block.noise_type = *noise;
    if (!at_word("out")) { error_here("expected 'out'"); return false; }
    take();
    if (!expect_punct("{")) return false;
    while (!at_punct("}") && peek().kind != Token::Kind::eof && !capped()) {
      auto s = expect_identifier("signal value");
      if (!s || !expect_punct(",")) { skip_row(); continue; }
      auto n = expect_identifier("noise value");
      if (!n || !expect_punct("->")) { skip_row(); continue; }
      auto r = expect_identifier("signal value");
      if (!r || !expect_punct(";")) { skip_row(); continue; }
      block.noise_rows.push_back({*s, *n, *r});
    }
    return expect_punct("}") && expect_punct("}");
  }

  bool parse_datatype_block(RawBlock& block) {
    if (!expect_punct("{")) return false;
    if (!at_word("state")) { error_here("expected 'state'"); return false; }
    take();
    auto state = expect_identifier("type name");
    if (!state) return false;
    block.state_type = *state;
    if (at_word("init")) {
      take();
      block.has_init = true;
      if (!parse_value_list(block.values)) return false;
    }
    while (at_word("op")) {
      take();
      auto op = expect_identifier("operation name");
      if (!op) return false;
      block.op_refs.push_back(*op);
    }
    if (block.op_refs.empty()) {
      error_here("datatype needs at least one 'op'");
      return false;
    }
    return expect_punct("}");
  }

  bool parse_retrieve_block(RawBlock& block) {
    if (!expect_punct("{")) return false;
    auto a = expect_identifier("abstract type name");
    if (!a || !expect_punct("<->")) return false;
    block.abstract_type = *a;
    auto c = expect_identifier("concrete type name");
    if (!c) return false;
    block.concrete_type = *c;
    if (!at_word("pairs")) { error_here("expected 'pairs'"); return false; }
    take();
    if (!expect_punct("{")) return false;
    while (!at_punct("}") && peek().kind != Token::Kind::eof && !capped()) {
      auto av = expect_identifier("abstract value");
      if (!av || !expect_punct(",")) { skip_row(); continue; }
      auto cv = expect_identifier("concrete value");
      if (!cv || !expect_punct(";")) { skip_row(); continue; }
      block.retrieve_pairs.emplace_back(*av, *cv);
    }
    return expect_punct("}") && expect_punct("}");
  }

  std::vector<RawBlock> parse_blocks();

  // ---- resolution ----
  void build(const std::vector<RawBlock>& blocks, Workspace& ws);
  const FiniteType* resolve_type(const Workspace& ws, const RawRef& ref) {
    auto it = ws.types.find(ref.text);
    if (it == ws.types.end()) {
      error_at(ref.line, ref.column, "unknown type " + ref.text);
      return nullptr;
    }
    return &it->second;
  }
  bool build_slots(const Workspace& ws, const RawBlock& block, bool for_transformer,
                   std::vector<Slot>& out);
  bool build_side(const std::vector<Slot>& slots, const std::vector<RawAssign>& assigns,
                  bool lhs, Binding& row, const RawRow* context);
  void build_operation(const RawBlock& block, Workspace& ws);
  void build_transformer(const RawBlock& block, Workspace& ws);
  void build_prob(const RawBlock& block, Workspace& ws);
  void build_noise(const RawBlock& block, Workspace& ws);
  void build_datatype(const RawBlock& block, Workspace& ws);
  void build_retrieve(const RawBlock& block, Workspace& ws);
};

std::vector<RawBlock> Parser::parse_blocks() {
  std::vector<RawBlock> blocks;
  while (peek().kind != Token::Kind::eof && !capped()) {
    if (peek().kind != Token::Kind::word || !kTopKeywords.contains(peek().text)) {
      error_here("expected a top-level declaration (type, subtype, op, "
                 "transformer, prob, noise, datatype or retrieve)");
      take();
      skip_to_top_level();
      continue;
    }
    const Token& kw = take();
    RawBlock block;
    block.line = kw.line;
    block.column = kw.column;
    if (kw.text == "type") block.kind = RawBlock::Kind::type;
    else if (kw.text == "subtype") block.kind = RawBlock::Kind::subtype;
    else if (kw.text == "op") block.kind = RawBlock::Kind::op;
    else if (kw.text == "transformer") block.kind = RawBlock::Kind::transformer;
    else if (kw.text == "prob") block.kind = RawBlock::Kind::prob;
    else if (kw.text == "noise") block.kind = RawBlock::Kind::noise;
    else if (kw.text == "datatype") block.kind = RawBlock::Kind::datatype;
    else block.kind = RawBlock::Kind::retrieve;

    auto name = expect_identifier("name");
    if (!name) { skip_to_top_level(); continue; }
    block.name = name->text;

    bool ok = false;
    switch (block.kind) {
      case RawBlock::Kind::type:
        ok = parse_value_list(block.values);
        break;
      case RawBlock::Kind::subtype:
        if (!at_word("of")) { error_here("expected 'of'"); break; }
        take();
        if (auto parent = expect_identifier("parent type name")) {
          block.parent = *parent;
          ok = parse_value_list(block.values);
        }
        break;
      case RawBlock::Kind::op:
        ok = parse_schema_block(block, true, "trans");
        break;
      case RawBlock::Kind::transformer:
        ok = parse_schema_block(block, false, "rel");
        break;
      case RawBlock::Kind::prob:
        ok = parse_schema_block(block, true, "dist");
        break;
      case RawBlock::Kind::noise:
        ok = parse_noise_block(block);
        break;
      case RawBlock::Kind::datatype:
        ok = parse_datatype_block(block);
        break;
      case RawBlock::Kind::retrieve:
        ok = parse_retrieve_block(block);
        break;
    }
    if (!ok) { skip_to_top_level(); continue; }
    blocks.push_back(std::move(block));
  }
  return blocks;
}

bool Parser::build_slots(const Workspace& ws, const RawBlock& block,
                         bool for_transformer, std::vector<Slot>& out) {
  // canonical order: states (with their primes), then inputs, then outputs
  bool ok = true;
  std::set<std::string> pre_names, out_names;
  auto add = [&](const RawSlot& raw) {
    const FiniteType* type = resolve_type(ws, raw.type);
    if (!type) { ok = false; return; }
    if (raw.kind == SlotKind::output) {
      if (!out_names.insert(raw.name).second) {
        error_at(raw.line, raw.column, "duplicate slot " + raw.name);
        ok = false;
        return;
      }
    } else if (!pre_names.insert(raw.name).second) {
      error_at(raw.line, raw.column,
               "slot " + raw.name + " clashes with a state or input slot");
      ok = false;
      return;
    }
    if (raw.kind == SlotKind::state) add_state_pair(out, raw.name, *type);
    else if (raw.kind == SlotKind::input) out.push_back(input_slot(raw.name, *type));
    else out.push_back(output_slot(raw.name, *type));
  };
  for (const auto& s : block.slots)
    if (s.kind == SlotKind::state) add(s);
  for (const auto& s : block.slots)
    if (s.kind == SlotKind::input) add(s);
  for (const auto& s : block.slots)
    if (s.kind == SlotKind::output) add(s);
  if (!for_transformer && ok) {
    bool has_state = std::any_of(out.begin(), out.end(), [](const Slot& s) {
      return s.kind == SlotKind::state;
    });
    if (!has_state) {
      error_at(block.line, block.column,
               block.name + " needs at least one state slot");
      ok = false;
    }
  }
  return ok;
}

// Fills the positions of one row side. lhs covers state+input slots (op) or
// input slots (transformer); rhs covers primed+output (op) or output.
bool Parser::build_side(const std::vector<Slot>& slots,
                        const std::vector<RawAssign>& assigns, bool lhs,
                        Binding& row, const RawRow* context) {
  auto side_kind = [&](const Slot& s) {
    if (lhs) return s.kind == SlotKind::state || s.kind == SlotKind::input;
    return s.kind == SlotKind::primed_state || s.kind == SlotKind::output;
  };
  std::vector<bool> assigned(slots.size(), false);
  bool ok = true;
  for (const auto& a : assigns) {
    const Slot* slot = nullptr;
    std::size_t position = 0;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const Slot& s = slots[i];
      if (!side_kind(s) || s.name != a.name) continue;
      bool want_primed = s.kind == SlotKind::primed_state;
      if (want_primed != a.primed) continue;
      slot = &s;
      position = i;
      break;
    }
    if (!slot) {
      error_at(a.line, a.column,
               "unknown slot " + a.name + (a.primed ? "'" : "") +
                   (lhs ? " on the left of ->" : " on the right of ->"));
      ok = false;
      continue;
    }
    if (assigned[position]) {
      error_at(a.line, a.column, "slot " + a.name + " assigned twice");
      ok = false;
      continue;
    }
    auto idx = slot->type.index_of(a.value.text);
    if (!idx) {
      error_at(a.value.line, a.value.column,
               "value " + a.value.text + " is not in type " + slot->type.name);
      ok = false;
      continue;
    }
    assigned[position] = true;
    row.values[position] = *idx;
  }
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!side_kind(slots[i]) || assigned[i]) continue;
    if (context)
      error_at(context->line, context->column,
               "row misses slot " + slots[i].display_name());
    ok = false;
  }
  return ok;
}

void Parser::build_operation(const RawBlock& block, Workspace& ws) {
  std::vector<Slot> slots;
  if (!build_slots(ws, block, false, slots)) return;
  std::vector<Binding> rows;
  bool ok = true;
  for (const auto& raw : block.rows) {
    Binding row;
    row.values.assign(slots.size(), 0);
    if (!build_side(slots, raw.lhs, true, row, &raw) ||
        !build_side(slots, raw.rhs, false, row, &raw)) {
      ok = false;
      continue;
    }
    rows.push_back(std::move(row));
  }
  if (!ok) return;
  try {
    Operation op = make_operation(block.name, std::move(slots), std::move(rows));
    if (!ws.operations.emplace(block.name, std::move(op)).second)
      error_at(block.line, block.column, "duplicate operation " + block.name);
  } catch (const Error& e) {
    error_at(block.line, block.column, e.what());
  }
}

void Parser::build_transformer(const RawBlock& block, Workspace& ws) {
  std::vector<Slot> slots;
  if (!build_slots(ws, block, true, slots)) return;
  std::vector<Binding> rows;
  bool ok = true;
  for (const auto& raw : block.rows) {
    Binding row;
    row.values.assign(slots.size(), 0);
    if (!build_side(slots, raw.lhs, true, row, &raw) ||
        !build_side(slots, raw.rhs, false, row, &raw)) {
      ok = false;
      continue;
    }
    rows.push_back(std::move(row));
  }
  if (!ok) return;
  try {
    IOTransformer t =
        make_io_transformer(block.name, std::move(slots), std::move(rows));
    if (!ws.transformers.emplace(block.name, std::move(t)).second)
      error_at(block.line, block.column, "duplicate transformer " + block.name);
  } catch (const Error& e) {
    error_at(block.line, block.column, e.what());
  }
}

void Parser::build_prob(const RawBlock& block, Workspace& ws) {
  std::vector<Slot> slots;
  if (!build_slots(ws, block, false, slots)) return;
  auto pre_idx = slot_indices(slots, {SlotKind::state, SlotKind::input});
  auto post_idx = slot_indices(slots, {SlotKind::primed_state, SlotKind::output});

  std::vector<std::pair<Binding, std::vector<Distribution>>> behavior;
  bool ok = true;
  for (const auto& raw : block.prob_rows) {
    RawRow context;
    context.line = raw.line;
    context.column = raw.column;

    Binding full;
    full.values.assign(slots.size(), 0);
    if (!build_side(slots, raw.lhs, true, full, &context)) { ok = false; continue; }
    Binding pre = project(full, pre_idx);

    std::vector<Distribution> dists;
    for (const auto& rawdist : raw.blocks) {
      std::vector<std::pair<Binding, Rational>> entries;
      Rational sum(0);
      bool dist_ok = true;
      for (const auto& entry : rawdist.entries) {
        auto weight = parse_rational(entry.weight.text);
        if (!weight) {
          error_at(entry.weight.line, entry.weight.column,
                   "malformed probability " + entry.weight.text);
          dist_ok = false;
          continue;
        }
        if (*weight <= Rational(0)) {
          error_at(entry.weight.line, entry.weight.column,
                   "probability must be positive");
          dist_ok = false;
          continue;
        }
        Binding row;
        row.values.assign(slots.size(), 0);
        if (!build_side(slots, entry.assigns, false, row, &context)) {
          dist_ok = false;
          continue;
        }
        sum += *weight;
        entries.emplace_back(project(row, post_idx), *weight);
      }
      if (!dist_ok) { ok = false; continue; }
      if (sum != Rational(1)) {
        error_at(rawdist.line, rawdist.column,
                 "distribution sums to " + fraction_string(sum));
        ok = false;
        continue;
      }
      dists.push_back(make_distribution(std::move(entries)));
    }
    if (dists.empty()) ok = false;
    if (!ok) continue;
    behavior.emplace_back(std::move(pre), std::move(dists));
  }
  if (!ok) return;
  try {
    ProbOperation pop =
        make_prob_operation(block.name, std::move(slots), std::move(behavior));
    if (!ws.prob_operations.emplace(block.name, std::move(pop)).second)
      error_at(block.line, block.column, "duplicate prob operation " + block.name);
  } catch (const Error& e) {
    error_at(block.line, block.column, e.what());
  }
}

void Parser::build_noise(const RawBlock& block, Workspace& ws) {
  const FiniteType* signal = resolve_type(ws, block.signal_type);
  const FiniteType* noise = resolve_type(ws, block.noise_type);
  if (!signal || !noise) return;

  bool ok = true;
  std::vector<std::array<std::string, 3>> rows;
  for (const auto& [s, n, r] : block.noise_rows) {
    if (!signal->index_of(s.text)) {
      error_at(s.line, s.column, "value " + s.text + " is not in type " + signal->name);
      ok = false;
    }
    if (!noise->index_of(n.text)) {
      error_at(n.line, n.column, "value " + n.text + " is not in type " + noise->name);
      ok = false;
    }
    if (!signal->index_of(r.text)) {
      error_at(r.line, r.column, "value " + r.text + " is not in type " + signal->name);
      ok = false;
    }
    rows.push_back({s.text, n.text, r.text});
  }
  if (!ok) return;
  try {
    NoiseModel m = make_noise_model(block.name, *signal, *noise, rows);
    if (!ws.noise_models.emplace(block.name, std::move(m)).second)
      error_at(block.line, block.column, "duplicate noise model " + block.name);
  } catch (const Error& e) {
    error_at(block.line, block.column, e.what());
  }
}

void Parser::build_datatype(const RawBlock& block, Workspace& ws) {
  const FiniteType* state = resolve_type(ws, block.state_type);
  if (!state) return;
  std::vector<Operation> ops;
  for (const auto& ref : block.op_refs) {
    auto it = ws.operations.find(ref.text);
    if (it == ws.operations.end()) {
      error_at(ref.line, ref.column, "unknown operation " + ref.text);
      return;
    }
    ops.push_back(it->second);
  }
  std::optional<std::vector<std::string>> init;
  if (block.has_init) {
    init.emplace();
    for (const auto& v : block.values) init->push_back(v.text);
  }
  try {
    DataType dt = make_datatype(block.name, *state, std::move(init), std::move(ops));
    if (!ws.datatypes.emplace(block.name, std::move(dt)).second)
      error_at(block.line, block.column, "duplicate datatype " + block.name);
  } catch (const Error& e) {
    error_at(block.line, block.column, e.what());
  }
}

void Parser::build_retrieve(const RawBlock& block, Workspace& ws) {
  const FiniteType* abstract_type = resolve_type(ws, block.abstract_type);
  const FiniteType* concrete_type = resolve_type(ws, block.concrete_type);
  if (!abstract_type || !concrete_type) return;
  bool ok = true;
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& [a, c] : block.retrieve_pairs) {
    if (!abstract_type->index_of(a.text)) {
      error_at(a.line, a.column,
               "value " + a.text + " is not in type " + abstract_type->name);
      ok = false;
    }
    if (!concrete_type->index_of(c.text)) {
      error_at(c.line, c.column,
               "value " + c.text + " is not in type " + concrete_type->name);
      ok = false;
    }
    pairs.emplace_back(a.text, c.text);
  }
  if (!ok) return;
  try {
    RetrieveRelation r =
        make_retrieve(block.name, *abstract_type, *concrete_type, pairs);
    if (!ws.retrieves.emplace(block.name, std::move(r)).second)
      error_at(block.line, block.column, "duplicate retrieve " + block.name);
  } catch (const Error& e) {
    error_at(block.line, block.column, e.what());
  }
}

void Parser::build(const std::vector<RawBlock>& blocks, Workspace& ws) {
  // pass 1: all types become visible before anything refers to them
  for (const auto& block : blocks) {
    if (block.kind != RawBlock::Kind::type && block.kind != RawBlock::Kind::subtype)
      continue;
    std::vector<std::string> values;
    for (const auto& v : block.values) values.push_back(v.text);
    try {
      FiniteType t = make_finite_type(block.name, std::move(values));
      if (!ws.types.emplace(block.name, std::move(t)).second) {
        error_at(block.line, block.column, "duplicate type " + block.name);
        continue;
      }
      if (block.kind == RawBlock::Kind::subtype)
        ws.subtype_parent[block.name] = block.parent.text;
    } catch (const Error& e) {
      error_at(block.line, block.column, e.what());
    }
  }
  // subset declarations must hold as value-set inclusions
  for (const auto& block : blocks) {
    if (block.kind != RawBlock::Kind::subtype) continue;
    auto self = ws.types.find(block.name);
    if (self == ws.types.end()) continue;
    auto parent = ws.types.find(block.parent.text);
    if (parent == ws.types.end()) {
      error_at(block.parent.line, block.parent.column,
               "unknown type " + block.parent.text);
      continue;
    }
    for (const auto& v : self->second.values)
      if (!parent->second.index_of(v))
        error_at(block.line, block.column,
                 "subtype " + block.name + " value " + v + " is not in " +
                     block.parent.text);
  }
  // pass 2: everything that refers to types
  for (const auto& block : blocks) {
    switch (block.kind) {
      case RawBlock::Kind::op: build_operation(block, ws); break;
      case RawBlock::Kind::transformer: build_transformer(block, ws); break;
      case RawBlock::Kind::prob: build_prob(block, ws); break;
      case RawBlock::Kind::noise: build_noise(block, ws); break;
      default: break;
    }
  }
  // pass 3: blocks that refer to operations
  for (const auto& block : blocks) {
    if (block.kind == RawBlock::Kind::datatype) build_datatype(block, ws);
    if (block.kind == RawBlock::Kind::retrieve) build_retrieve(block, ws);
  }
}

ParseResult Parser::run() {
  std::vector<RawBlock> blocks = parse_blocks();
  Workspace ws;
  build(blocks, ws);

  ParseResult result;
  result.diagnostics = std::move(diags_);
  bool failed = std::any_of(result.diagnostics.begin(), result.diagnostics.end(),
                            [](const ParseDiagnostic& d) {
                              return d.severity == ParseDiagnostic::Severity::error;
                            });
  if (!failed) result.workspace = std::move(ws);
  return result;
}

}  // namespace

std::string format_diagnostic(const ParseDiagnostic& d) {
  std::ostringstream out;
  out << d.line << ':' << d.column << ": "
      << (d.severity == ParseDiagnostic::Severity::error ? "error" : "warning")
      << ": " << d.message;
  return out.str();
}

ParseResult parse_spec(std::string_view source) {
  Parser parser(source);
  return parser.run();
}

// ---- rendering ----

namespace {

void render_row_side(std::ostream& out, const std::vector<Slot>& slots,
                     const Binding& row, bool lhs) {
  bool first = true;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const Slot& s = slots[i];
    bool on_side = lhs ? (s.kind == SlotKind::state || s.kind == SlotKind::input)
                       : (s.kind == SlotKind::primed_state ||
                          s.kind == SlotKind::output);
    if (!on_side) continue;
    if (!first) out << ", ";
    first = false;
    out << s.name << (s.kind == SlotKind::primed_state ? "'" : "") << '='
        << s.type.values[row.values[i]];
  }
}

void render_slots(std::ostream& out, const std::vector<Slot>& slots) {
  for (const auto& s : slots) {
    switch (s.kind) {
      case SlotKind::state: out << "  state " << s.name << ':' << s.type.name << '\n'; break;
      case SlotKind::input: out << "  in " << s.name << ':' << s.type.name << '\n'; break;
      case SlotKind::output: out << "  out " << s.name << ':' << s.type.name << '\n'; break;
      case SlotKind::primed_state: break;  // implied by the state slot
    }
  }
}

void require_renderable(const std::vector<Slot>& slots, const std::string& name) {
  std::set<std::string> pre;
  for (const auto& s : slots)
    if (s.kind == SlotKind::state || s.kind == SlotKind::input)
      if (!pre.insert(s.name).second)
        throw Error(name + ": state and input slots share the base name " +
                    s.name + "; not renderable");
}

}  // namespace

std::string render_spec(const Workspace& w) {
  std::ostringstream out;
  for (const auto& [name, type] : w.types) {
    auto parent = w.subtype_parent.find(name);
    if (parent != w.subtype_parent.end())
      out << "subtype " << name << " of " << parent->second << " {";
    else
      out << "type " << name << " {";
    for (const auto& v : type.values) out << ' ' << v;
    out << " }\n";
  }

  for (const auto& [name, op] : w.operations) {
    require_renderable(op.slots, name);
    out << "\nop " << name << " {\n";
    render_slots(out, op.slots);
    out << "  trans {\n";
    for (const auto& row : op.transitions) {
      out << "    ";
      render_row_side(out, op.slots, row, true);
      out << " -> ";
      render_row_side(out, op.slots, row, false);
      out << " ;\n";
    }
    out << "  }\n}\n";
  }

  for (const auto& [name, t] : w.transformers) {
    out << "\ntransformer " << name << " {\n";
    render_slots(out, t.slots);
    out << "  rel {\n";
    for (const auto& row : t.pairs) {
      out << "    ";
      // transformer rows: inputs left, outputs right
      bool first = true;
      for (std::size_t i = 0; i < t.slots.size(); ++i) {
        if (t.slots[i].kind != SlotKind::input) continue;
        if (!first) out << ", ";
        first = false;
        out << t.slots[i].name << '=' << t.slots[i].type.values[row.values[i]];
      }
      out << " -> ";
      first = true;
      for (std::size_t i = 0; i < t.slots.size(); ++i) {
        if (t.slots[i].kind != SlotKind::output) continue;
        if (!first) out << ", ";
        first = false;
        out << t.slots[i].name << '=' << t.slots[i].type.values[row.values[i]];
      }
      out << " ;\n";
    }
    out << "  }\n}\n";
  }

  for (const auto& [name, pop] : w.prob_operations) {
    require_renderable(pop.slots, name);
    auto post_idx = slot_indices(pop.slots,
                                 {SlotKind::primed_state, SlotKind::output});
    auto pre_idx = slot_indices(pop.slots, {SlotKind::state, SlotKind::input});
    out << "\nprob " << name << " {\n";
    render_slots(out, pop.slots);
    out << "  dist {\n";
    for (const auto& [pre, dists] : pop.behavior) {
      out << "    ";
      bool first = true;
      for (std::size_t i = 0; i < pre_idx.size(); ++i) {
        const Slot& s = pop.slots[pre_idx[i]];
        if (!first) out << ", ";
        first = false;
        out << s.name << '=' << s.type.values[pre.values[i]];
      }
      out << " ->";
      for (const auto& dist : dists) {
        out << " [ ";
        bool first_entry = true;
        for (const auto& [tuple, weight] : dist.weights) {
          if (!first_entry) out << " | ";
          first_entry = false;
          out << rational_to_string(weight) << ": ";
          bool first_assign = true;
          for (std::size_t i = 0; i < post_idx.size(); ++i) {
            const Slot& s = pop.slots[post_idx[i]];
            if (!first_assign) out << ", ";
            first_assign = false;
            out << s.name << (s.kind == SlotKind::primed_state ? "'" : "")
                << '=' << s.type.values[tuple.values[i]];
          }
        }
        out << " ]";
      }
      out << " ;\n";
    }
    out << "  }\n}\n";
  }

  for (const auto& [name, m] : w.noise_models) {
    out << "\nnoise " << name << " {\n";
    out << "  signal " << m.signal.name << '\n';
    out << "  noisetype " << m.noise.name << '\n';
    out << "  out {\n";
    for (ValueIndex s = 0; s < m.signal.size(); ++s)
      for (ValueIndex n = 0; n < m.noise.size(); ++n)
        out << "    " << m.signal.values[s] << " , " << m.noise.values[n]
            << " -> " << m.signal.values[m.out(s, n)] << " ;\n";
    out << "  }\n}\n";
  }

  for (const auto& [name, dt] : w.datatypes) {
    out << "\ndatatype " << name << " {\n";
    out << "  state " << dt.state.name << '\n';
    out << "  init {";
    for (ValueIndex i : dt.init) out << ' ' << dt.state.values[i];
    out << " }\n";
    for (const auto& op : dt.ops) out << "  op " << op.name << '\n';
    out << "}\n";
  }

  for (const auto& [name, r] : w.retrieves) {
    out << "\nretrieve " << name << " {\n";
    out << "  " << r.abstract_type.name << " <-> " << r.concrete_type.name << '\n';
    out << "  pairs {\n";
    for (const auto& [a, c] : r.pairs)
      out << "    " << r.abstract_type.values[a] << " , "
          << r.concrete_type.values[c] << " ;\n";
    out << "  }\n}\n";
  }
  return out.str();
}

}  // namespace refinery
