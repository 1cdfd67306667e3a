/*
 * Copyright (c) 2026, the faircheck authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
*/

#include "faircheck/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <sstream>

#include "faircheck/elaborate.hpp"

namespace faircheck {

int ProtocolSpec::role_index(const std::string& r) const {
  for (size_t i = 0; i < roles.size(); ++i)
    if (roles[i] == r) return static_cast<int>(i);
  return -1;
}

const EvidenceDef* ProtocolSpec::find_evidence(const std::string& n) const {
  for (const auto& e : evidences)
    if (e.name == n) return &e;
  return nullptr;
}

ChannelModel ProtocolSpec::channel(const std::string& a,
                                   const std::string& b) const {
  auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  auto it = channels.find(key);
  return it == channels.end() ? ChannelModel::Dy : it->second;
}

Formula Formula::aknows(std::string role, std::string session, TermFormula tf) {
  Formula f;
  f.kind = Kind::Aknows;
  f.role = std::move(role);
  f.session = std::move(session);
  f.tf = std::move(tf);
  return f;
}

Formula Formula::deduce(std::string role, std::string session, TermFormula tf) {
  Formula f;
  f.kind = Kind::Deduce;
  f.role = std::move(role);
  f.session = std::move(session);
  f.tf = std::move(tf);
  return f;
}

Formula Formula::auth(std::string x, std::string y, Term d) {
  Formula f;
  f.kind = Kind::Auth;
  f.role = std::move(x);
  f.peer = std::move(y);
  f.auth_data = d;
  return f;
}

Formula Formula::conj(std::vector<Formula> ks) {
  Formula f;
  f.kind = Kind::And;
  f.kids = std::move(ks);
  return f;
}

Formula Formula::implies(Formula a, Formula b) {
  Formula f;
  f.kind = Kind::Implies;
  f.kids = {std::move(a), std::move(b)};
  return f;
}

Formula Formula::iff(Formula a, Formula b) {
  Formula f;
  f.kind = Kind::Iff;
  f.kids = {std::move(a), std::move(b)};
  return f;
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok : uint8_t { Ident, Num, Punct, End };

struct Token {
  Tok type = Tok::End;
  std::string text;
  long value = 0;
  SourcePos pos;
};

std::vector<Token> lex(const std::string& text) {
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto bump = [&](size_t n) {
    for (size_t k = 0; k < n; ++k) {
      if (text[i + k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    i += n;
  };
  static const char* puncts[] = {"<->", "<=>", "->", "=>", ":=", nullptr};
  while (i < text.size()) {
    char c = text[i];
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') bump(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      bump(1);
      continue;
    }
    SourcePos pos{line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) ||
              text[j] == '_'))
        ++j;
      out.push_back({Tok::Ident, text.substr(i, j - i), 0, pos});
      bump(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < text.size() &&
             std::isdigit(static_cast<unsigned char>(text[j])))
        ++j;
      Token t{Tok::Num, text.substr(i, j - i), 0, pos};
      t.value = std::stol(t.text);
      out.push_back(t);
      bump(j - i);
      continue;
    }
    bool matched = false;
    for (const char** p = puncts; *p; ++p) {
      size_t n = std::char_traits<char>::length(*p);
      if (text.compare(i, n, *p) == 0) {
        out.push_back({Tok::Punct, *p, 0, pos});
        bump(n);
        matched = true;
        break;
      }
    }
    if (matched) continue;
    static const std::string singles = ".,:;(){}?=@!*<>";
    if (singles.find(c) != std::string::npos) {
      out.push_back({Tok::Punct, std::string(1, c), 0, pos});
      bump(1);
      continue;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos);
  }
  out.push_back({Tok::End, "", 0, {line, col}});
  return out;
}

// ---------------------------------------------------------------------------
// Parser core

struct Parser {
  std::vector<Token> toks;
  size_t at = 0;

  explicit Parser(const std::string& text) : toks(lex(text)) {}

  const Token& peek(size_t ahead = 0) const {
    size_t i = at + ahead;
    return i < toks.size() ? toks[i] : toks.back();
  }
  const Token& next() {
    const Token& t = peek();
    if (t.type != Tok::End) ++at;
    return t;
  }
  bool at_end() const { return peek().type == Tok::End; }
  bool is_punct(const std::string& p, size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.type == Tok::Punct && t.text == p;
  }
  bool is_kw(const std::string& k, size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.type == Tok::Ident && t.text == k;
  }
  bool eat_punct(const std::string& p) {
    if (!is_punct(p)) return false;
    ++at;
    return true;
  }
  bool eat_kw(const std::string& k) {
    if (!is_kw(k)) return false;
    ++at;
    return true;
  }
  void expect_punct(const std::string& p) {
    if (!eat_punct(p))
      throw ParseError("expected '" + p + "', got '" + peek().text + "'",
                       peek().pos);
  }
  void expect_kw(const std::string& k) {
    if (!eat_kw(k))
      throw ParseError("expected '" + k + "', got '" + peek().text + "'",
                       peek().pos);
  }
  std::string ident(const char* what) {
    if (peek().type != Tok::Ident)
      throw ParseError(std::string("expected ") + what + ", got '" +
                           peek().text + "'",
                       peek().pos);
    return next().text;
  }
  long number(const char* what) {
    if (peek().type != Tok::Num)
      throw ParseError(std::string("expected ") + what, peek().pos);
    return next().value;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, peek().pos);
  }
};

const std::set<std::string> kReservedTermIdents = {
    "sig", "h", "pk", "inv", "and", "or", "not", "query", "true", "false"};

// ---------------------------------------------------------------------------
// Term parsing

Term parse_term_in(Parser& p, const TermScope& scope);

Term resolve_ident(Parser& p, const TermScope& scope) {
  const Token& tok = p.peek();
  std::string name = p.ident("identifier");
  // Optional origin suffix name@role#N used by trace renderings.
  if (p.is_punct("@")) {
    p.next();
    std::string role = p.ident("origin role");
    p.expect_punct("#");
    long sess = p.number("origin session");
    name += "@" + role + "#" + std::to_string(sess);
  }
  auto ai = scope.aliases.find(name);
  if (ai != scope.aliases.end()) return ai->second;
  auto ni = scope.names.find(name);
  if (ni != scope.names.end()) return ni->second;
  throw ParseError("unknown identifier '" + name + "'", tok.pos);
}

Term parse_primary(Parser& p, const TermScope& scope) {
  if (p.eat_punct("{")) {
    Term body = parse_term_in(p, scope);
    p.expect_punct("}");
    // Key position: pk(x) means asymmetric, otherwise symmetric.
    if (p.is_kw("pk")) {
      p.next();
      p.expect_punct("(");
      Term agent = parse_term_in(p, scope);
      p.expect_punct(")");
      return Term::aenc(body, Term::pk(agent));
    }
    if (p.eat_punct("(")) {
      Term key = parse_term_in(p, scope);
      p.expect_punct(")");
      return Term::senc(body, key);
    }
    if (p.eat_punct("?")) {
      Term key = Term::var(p.ident("variable name"));
      return Term::senc(body, key);
    }
    Term key = resolve_ident(p, scope);
    return Term::senc(body, key);
  }
  if (p.is_kw("sig")) {
    p.next();
    p.expect_punct("(");
    Term signer = parse_term_in(p, scope);
    p.expect_punct(",");
    Term body = parse_term_in(p, scope);
    p.expect_punct(")");
    return Term::sign(body, Term::inv(Term::pk(signer)));
  }
  if (p.is_kw("h")) {
    p.next();
    p.expect_punct("(");
    Term body = parse_term_in(p, scope);
    p.expect_punct(")");
    return Term::hash(body);
  }
  if (p.is_kw("pk")) {
    p.next();
    p.expect_punct("(");
    Term agent = parse_term_in(p, scope);
    p.expect_punct(")");
    return Term::pk(agent);
  }
  if (p.is_kw("inv")) {
    p.next();
    p.expect_punct("(");
    Term key = parse_term_in(p, scope);
    p.expect_punct(")");
    return Term::inv(key);
  }
  if (p.eat_punct("(")) {
    Term t = parse_term_in(p, scope);
    p.expect_punct(")");
    return t;
  }
  if (p.eat_punct("?")) {
    std::string name = p.ident("variable name");
    std::optional<AtomKind> sort;
    if (p.eat_punct(":")) {
      std::string k = p.ident("atom kind");
      sort = atom_kind_from_string(k);
      if (!sort) p.fail("unknown atom kind '" + k + "'");
    }
    return Term::var(name, sort);
  }
  return resolve_ident(p, scope);
}

Term parse_term_in(Parser& p, const TermScope& scope) {
  std::vector<Term> parts{parse_primary(p, scope)};
  while (p.is_punct(".")) {
    p.next();
    parts.push_back(parse_primary(p, scope));
  }
  return Term::dots(parts);
}

// ---------------------------------------------------------------------------
// Term formula parsing

TermFormula parse_tf_or(Parser& p, const TermScope& scope);

TermFormula parse_tf_unit(Parser& p, const TermScope& scope) {
  if (p.eat_kw("not")) return TermFormula::mk_not(parse_tf_unit(p, scope));
  if (p.is_punct("(")) {
    size_t save = p.at;
    p.next();
    TermFormula inner = parse_tf_or(p, scope);
    p.expect_punct(")");
    if (inner.kind != TermFormula::Kind::Leaf) return inner;
    // A parenthesized plain term may continue as a larger term.
    if (p.is_punct(".")) {
      p.at = save;
      return TermFormula::mk_leaf(parse_term_in(p, scope));
    }
    return inner;
  }
  // Evidence names may appear as formula references.
  if (p.peek().type == Tok::Ident && scope.spec) {
    if (const EvidenceDef* ev = scope.spec->find_evidence(p.peek().text)) {
      // Only when it is not also a term name (term names win).
      if (!scope.names.count(p.peek().text) &&
          !scope.aliases.count(p.peek().text)) {
        p.next();
        return ev->formula;
      }
    }
  }
  return TermFormula::mk_leaf(parse_term_in(p, scope));
}

TermFormula parse_tf_and(Parser& p, const TermScope& scope) {
  TermFormula f = parse_tf_unit(p, scope);
  while (p.is_kw("and")) {
    p.next();
    f = TermFormula::mk_and(std::move(f), parse_tf_unit(p, scope));
  }
  return f;
}

TermFormula parse_tf_or(Parser& p, const TermScope& scope) {
  TermFormula f = parse_tf_and(p, scope);
  while (p.is_kw("or")) {
    p.next();
    f = TermFormula::mk_or(std::move(f), parse_tf_and(p, scope));
  }
  return f;
}

// ---------------------------------------------------------------------------
// Protocol parsing

const std::set<std::string> kSectionKw = {"protocol", "roles", "ttp",
                                          "labels",   "fresh", "alias",
                                          "channel",  "main",  "sub",
                                          "evidence"};
const std::set<std::string> kAttachKw = {"annotate", "witness", "request"};

struct ProtoParser {
  Parser p;
  ProtocolSpec spec;
  TermScope scope;

  explicit ProtoParser(const std::string& text) : p(text) {}

  bool at_section() const {
    return p.peek().type == Tok::Ident && kSectionKw.count(p.peek().text);
  }

  void check_new_name(const std::string& n) {
    if (kReservedTermIdents.count(n))
      p.fail("'" + n + "' is a reserved word");
    if (scope.names.count(n) || scope.aliases.count(n))
      p.fail("name '" + n + "' already declared");
  }

  std::string role_ref(bool allow_g = false) {
    const Token& tok = p.peek();
    std::string r = p.ident("role name");
    if (allow_g && r == "G") return r;
    if (spec.role_index(r) < 0)
      throw ParseError("unknown role '" + r + "'", tok.pos);
    return r;
  }

  Attachment parse_attachment() {
    Attachment a{};
    if (p.eat_kw("annotate")) {
      a.kind = Attachment::Kind::Annotate;
      a.role = role_ref();
      p.expect_kw("knows");
      a.terms.push_back(parse_term_in(p, scope));
      while (p.eat_punct(",")) a.terms.push_back(parse_term_in(p, scope));
      return a;
    }
    if (p.eat_kw("witness")) {
      a.kind = Attachment::Kind::Witness;
      a.role = role_ref();
      p.expect_kw("for");
      a.peer = role_ref();
      p.expect_punct(":");
      a.data = parse_term_in(p, scope);
      return a;
    }
    if (p.eat_kw("request")) {
      a.kind = Attachment::Kind::Request;
      a.role = role_ref();
      p.expect_kw("of");
      a.peer = role_ref();
      p.expect_punct(":");
      a.data = parse_term_in(p, scope);
      return a;
    }
    p.fail("expected attachment");
  }

  StoreUpdate parse_store() {
    StoreUpdate s;
    if (p.eat_kw("resolved"))
      s.resolved = true;
    else if (p.eat_kw("aborted"))
      s.resolved = false;
    else
      p.fail("expected 'aborted' or 'resolved'");
    p.expect_punct("(");
    s.key = parse_term_in(p, scope);
    p.expect_punct(")");
    return s;
  }

  void parse_arm_attachments(BranchArm& arm) {
    while (true) {
      if (p.peek().type == Tok::Ident && kAttachKw.count(p.peek().text)) {
        arm.attachments.push_back(parse_attachment());
      } else if (p.is_kw("store")) {
        p.next();
        if (arm.store) p.fail("duplicate store update in branch arm");
        arm.store = parse_store();
      } else {
        return;
      }
    }
  }

  Exchange parse_exchange(bool in_sub, const std::string& ttp_role) {
    Exchange ex;
    ex.number = static_cast<int>(p.number("exchange number"));
    p.expect_punct(".");
    ex.from = role_ref(in_sub);
    bool fetch = false;
    if (p.eat_punct("->")) {
      fetch = false;
    } else if (p.eat_punct("<->")) {
      fetch = true;
    } else {
      p.fail("expected '->' or '<->'");
    }
    ex.fetch = fetch;
    ex.to = role_ref(in_sub);
    p.expect_punct(":");
    if (p.is_kw("branch")) {
      if (!in_sub || ex.from != ttp_role)
        p.fail("branch replies are only allowed from the store role in "
               "sub-protocols");
      p.next();
      BranchSpec br;
      if (p.eat_kw("resolved"))
        br.on_resolved = true;
      else if (p.eat_kw("aborted"))
        br.on_resolved = false;
      else
        p.fail("expected 'aborted' or 'resolved'");
      p.expect_punct("(");
      br.key = parse_term_in(p, scope);
      p.expect_punct(")");
      p.expect_kw("then");
      p.expect_kw("reply");
      br.then_arm.reply = parse_term_in(p, scope);
      parse_arm_attachments(br.then_arm);
      p.expect_kw("else");
      p.expect_kw("reply");
      br.else_arm.reply = parse_term_in(p, scope);
      parse_arm_attachments(br.else_arm);
      ex.branch = std::move(br);
      return ex;
    }
    ex.payload = parse_term_in(p, scope);
    if (fetch) {
      p.expect_kw("query");
      ex.query = parse_term_in(p, scope);
    }
    while (p.peek().type == Tok::Ident && kAttachKw.count(p.peek().text))
      ex.attachments.push_back(parse_attachment());
    return ex;
  }

  ProtocolSpec run() {
    p.expect_kw("protocol");
    spec.name = p.ident("protocol name");
    while (!p.at_end()) {
      if (p.eat_kw("roles")) {
        while (p.peek().type == Tok::Ident && !at_section()) {
          std::string r = p.ident("role name");
          check_new_name(r);
          spec.roles.push_back(r);
          scope.names.emplace(r, Term::var(r, AtomKind::Agent));
        }
        if (spec.roles.empty()) p.fail("empty roles section");
        continue;
      }
      if (p.eat_kw("ttp")) {
        std::string r = role_ref();
        spec.ttp_role = r;
        continue;
      }
      if (p.eat_kw("labels")) {
        while (p.peek().type == Tok::Ident && !at_section()) {
          std::string l = p.ident("label name");
          check_new_name(l);
          spec.labels.push_back(l);
          scope.names.emplace(l, Term::atom(AtomKind::Label, l));
        }
        continue;
      }
      if (p.eat_kw("fresh")) {
        std::string role = role_ref();
        p.expect_punct(":");
        while (true) {
          std::string n = p.ident("fresh name");
          check_new_name(n);
          std::string ks = p.ident("atom kind");
          auto kind = atom_kind_from_string(ks);
          if (!kind) p.fail("unknown atom kind '" + ks + "'");
          spec.fresh.push_back({role, n, *kind});
          scope.names.emplace(n, Term::var(n, *kind));
          if (!p.eat_punct(",")) break;
        }
        continue;
      }
      if (p.eat_kw("alias")) {
        std::string n = p.ident("alias name");
        check_new_name(n);
        p.expect_punct("=");
        Term v = parse_term_in(p, scope);
        spec.aliases.push_back({n, v});
        scope.aliases.emplace(n, v);
        continue;
      }
      if (p.eat_kw("channel")) {
        std::string a = role_ref();
        std::string b = role_ref();
        ChannelModel m;
        if (p.eat_kw("secure"))
          m = ChannelModel::Secure;
        else if (p.eat_kw("dy"))
          m = ChannelModel::Dy;
        else
          p.fail("expected 'dy' or 'secure'");
        auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
        spec.channels[key] = m;
        continue;
      }
      if (p.eat_kw("main")) {
        p.expect_punct(":");
        while (p.peek().type == Tok::Num)
          spec.main_lines.push_back(
              parse_exchange(false, spec.ttp_role.value_or("")));
        continue;
      }
      if (p.eat_kw("sub")) {
        SubProtocol sub;
        sub.name = p.ident("sub-protocol name");
        p.expect_kw("by");
        while (true) {
          EntrySpec e;
          e.role = role_ref();
          p.expect_kw("when");
          p.expect_kw("waiting");
          p.expect_kw("main");
          p.expect_punct(".");
          e.waiting_line = static_cast<int>(p.number("main line number"));
          sub.entries.push_back(e);
          if (!p.eat_punct(",")) break;
        }
        p.expect_punct(":");
        while (p.peek().type == Tok::Num)
          sub.lines.push_back(
              parse_exchange(true, spec.ttp_role.value_or("")));
        if (sub.lines.empty()) p.fail("empty sub-protocol");
        spec.subs.push_back(std::move(sub));
        continue;
      }
      if (p.eat_kw("evidence")) {
        EvidenceDef ev;
        ev.name = p.ident("evidence name");
        check_new_name(ev.name);
        p.expect_kw("for");
        ev.owner = role_ref();
        p.expect_kw("against");
        ev.against = role_ref();
        p.expect_kw("protects");
        ev.protects = p.ident("protected message symbol");
        if (!scope.names.count(ev.protects))
          p.fail("unknown protected symbol '" + ev.protects + "'");
        p.expect_punct(":=");
        ev.formula = parse_tf_or(p, scope);
        spec.evidences.push_back(std::move(ev));
        continue;
      }
      p.fail("expected a section keyword, got '" + p.peek().text + "'");
    }
    validate();
    return spec;
  }

  void validate() {
    for (const auto& f : spec.fresh)
      if (spec.role_index(f.role) < 0)
        throw ParseError("fresh owner '" + f.role + "' is not a role", {});
    for (const auto& sub : spec.subs) {
      for (const auto& e : sub.entries) {
        const Exchange* line = nullptr;
        for (const auto& ex : spec.main_lines)
          if (ex.number == e.waiting_line) line = &ex;
        if (!line)
          throw ParseError("sub '" + sub.name + "' waits on unknown main." +
                               std::to_string(e.waiting_line),
                           {});
        if (line->to != e.role)
          throw ParseError("sub '" + sub.name + "': role " + e.role +
                               " is not the receiver of main." +
                               std::to_string(e.waiting_line),
                           {});
      }
      bool generic = sub.entries.size() > 1;
      for (const auto& ex : sub.lines) {
        if ((ex.from == "G" || ex.to == "G") && !generic &&
            sub.entries.size() != 1)
          throw ParseError("generic role G in sub '" + sub.name + "'", {});
      }
    }
    // Deeper static checks (variable boundedness, annotation scope,
    // deducibility of send templates) happen during elaboration.
    elaborate(spec);
  }
};

}  // namespace

TermScope protocol_scope(const ProtocolSpec& spec) {
  TermScope scope;
  scope.spec = &spec;
  for (const auto& r : spec.roles)
    scope.names.emplace(r, Term::var(r, AtomKind::Agent));
  for (const auto& l : spec.labels)
    scope.names.emplace(l, Term::atom(AtomKind::Label, l));
  for (const auto& f : spec.fresh)
    scope.names.emplace(f.name, Term::var(f.name, f.kind));
  for (const auto& a : spec.aliases) scope.aliases.emplace(a.name, a.value);
  return scope;
}

ProtocolSpec parse_protocol(const std::string& text) {
  ProtoParser pp(text);
  return pp.run();
}

Term parse_term(const std::string& text, const TermScope& scope) {
  Parser p(text);
  Term t = parse_term_in(p, scope);
  if (!p.at_end()) p.fail("trailing input after term");
  return t;
}

TermFormula parse_term_formula(const std::string& text,
                               const TermScope& scope) {
  Parser p(text);
  TermFormula f = parse_tf_or(p, scope);
  if (!p.at_end()) p.fail("trailing input after formula");
  return f;
}

// ---------------------------------------------------------------------------
// Scenario parsing

Scenario parse_scenario(const std::string& text, const ProtocolSpec& spec) {
  Parser p(text);
  Scenario scn;
  p.expect_kw("scenario");
  scn.name = p.ident("scenario name");
  p.expect_kw("protocol");
  scn.protocol = p.ident("protocol name");
  // A scenario runs against any protocol variant with the same role set;
  // the protocol line records the intended family.
  if (scn.protocol != spec.name && spec.name.find(scn.protocol) != 0)
    p.fail("scenario is for protocol '" + scn.protocol + "', loaded '" +
           spec.name + "'");
  while (!p.at_end()) {
    if (p.eat_kw("session")) {
      SessionDecl s;
      s.id = p.ident("session id");
      p.expect_punct(":");
      while (true) {
        std::string role = p.ident("role name");
        if (spec.role_index(role) < 0) p.fail("unknown role '" + role + "'");
        p.expect_punct("=");
        std::string agent = p.ident("agent name");
        if (!s.role_agents.emplace(role, agent).second)
          p.fail("role '" + role + "' bound twice");
        if (!p.eat_punct(",")) break;
      }
      for (const auto& r : spec.roles)
        if (!s.role_agents.count(r))
          p.fail("session " + s.id + " does not bind role '" + r + "'");
      scn.sessions.push_back(std::move(s));
      continue;
    }
    if (p.eat_kw("dishonest")) {
      while (p.peek().type == Tok::Ident && !p.is_kw("session") &&
             !p.is_kw("bound") && !p.is_kw("channel") && !p.is_kw("dishonest"))
        scn.dishonest.insert(p.ident("agent name"));
      continue;
    }
    if (p.eat_kw("channel")) {
      std::string a = p.ident("role name");
      std::string b = p.ident("role name");
      if (spec.role_index(a) < 0 || spec.role_index(b) < 0)
        p.fail("unknown role in channel override");
      ChannelModel m;
      if (p.eat_kw("secure"))
        m = ChannelModel::Secure;
      else if (p.eat_kw("dy"))
        m = ChannelModel::Dy;
      else
        p.fail("expected 'dy' or 'secure'");
      auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
      scn.channel_overrides[key] = m;
      continue;
    }
    if (p.eat_kw("bound")) {
      std::string which = p.ident("bound name");
      long v = p.number("bound value");
      if (v <= 0) p.fail("bounds must be positive");
      if (which == "max_states")
        scn.bounds.max_states = static_cast<uint64_t>(v);
      else if (which == "max_depth")
        scn.bounds.max_depth = static_cast<uint32_t>(v);
      else if (which == "fresh_budget")
        scn.bounds.fresh_budget = static_cast<uint32_t>(v);
      else
        p.fail("unknown bound '" + which + "'");
      continue;
    }
    p.fail("expected scenario section, got '" + p.peek().text + "'");
  }
  // Cross-session checks.
  if (spec.ttp_role) {
    std::string agent;
    for (const auto& s : scn.sessions) {
      const std::string& a = s.role_agents.at(*spec.ttp_role);
      if (agent.empty()) agent = a;
      if (a != agent)
        throw ParseError(
            "store role must bind the same agent across sessions", {});
    }
    if (!agent.empty() && scn.dishonest.count(agent))
      throw ParseError("the store role cannot be dishonest", {});
  }
  std::set<std::string> agents;
  for (const auto& s : scn.sessions)
    for (const auto& [r, a] : s.role_agents) agents.insert(a);
  for (const auto& d : scn.dishonest)
    if (!agents.count(d))
      throw ParseError("dishonest agent '" + d + "' is not bound anywhere",
                       {});
  return scn;
}

// ---------------------------------------------------------------------------
// Property parsing

namespace {

struct PropParser {
  Parser p;
  const ProtocolSpec& spec;
  const Scenario& scn;
  TermScope scope;

  PropParser(const std::string& text, const ProtocolSpec& s,
             const Scenario& sc)
      : p(text), spec(s), scn(sc), scope(protocol_scope(s)) {}

  std::string role_ref() {
    const Token& tok = p.peek();
    std::string r = p.ident("role name");
    if (spec.role_index(r) < 0)
      throw ParseError("unknown role '" + r + "'", tok.pos);
    return r;
  }

  bool is_session(const std::string& id) const {
    for (const auto& s : scn.sessions)
      if (s.id == id) return true;
    return false;
  }

  std::string session_ref() {
    const Token& tok = p.peek();
    std::string s = p.ident("session id");
    if (!is_session(s))
      throw ParseError("unknown session '" + s + "'", tok.pos);
    return s;
  }

  std::string default_session() {
    if (scn.sessions.size() != 1)
      p.fail("deduce without a session requires a single-session scenario");
    return scn.sessions[0].id;
  }

  Formula parse_unit() {
    if (p.eat_kw("not")) {
      Formula f;
      f.kind = Formula::Kind::Not;
      f.kids.push_back(parse_unit());
      return f;
    }
    if (p.eat_punct("(")) {
      Formula f = parse_iff();
      p.expect_punct(")");
      return f;
    }
    if (p.eat_kw("true") || p.eat_kw("false")) {
      Formula f;
      f.kind = Formula::Kind::Const;
      f.cval = p.toks[p.at - 1].text == "true";
      return f;
    }
    if (p.eat_kw("aknows")) {
      p.expect_punct("(");
      std::string role = role_ref();
      p.expect_punct(",");
      std::string sess = session_ref();
      p.expect_punct(",");
      TermFormula tf = parse_tf_or(p, scope);
      p.expect_punct(")");
      return Formula::aknows(role, sess, std::move(tf));
    }
    if (p.eat_kw("deduce")) {
      p.expect_punct("(");
      std::string role = role_ref();
      p.expect_punct(",");
      std::string sess;
      if (p.peek().type == Tok::Ident && p.is_punct(",", 1) &&
          is_session(p.peek().text)) {
        sess = session_ref();
        p.expect_punct(",");
      } else {
        sess = default_session();
      }
      TermFormula tf = parse_tf_or(p, scope);
      p.expect_punct(")");
      return Formula::deduce(role, sess, std::move(tf));
    }
    if (p.eat_kw("auth")) {
      p.expect_punct("(");
      std::string x = role_ref();
      p.expect_punct(",");
      std::string y = role_ref();
      p.expect_punct(",");
      Term d = parse_term_in(p, scope);
      p.expect_punct(")");
      return Formula::auth(x, y, d);
    }
    p.fail("expected a formula, got '" + p.peek().text + "'");
  }

  Formula parse_and() {
    Formula f = parse_unit();
    while (p.is_kw("and")) {
      p.next();
      Formula g = parse_unit();
      if (f.kind == Formula::Kind::And) {
        f.kids.push_back(std::move(g));
      } else {
        f = Formula::conj({std::move(f), std::move(g)});
      }
    }
    return f;
  }

  Formula parse_or() {
    Formula f = parse_and();
    while (p.is_kw("or")) {
      p.next();
      Formula g;
      g.kind = Formula::Kind::Or;
      g.kids = {std::move(f), parse_and()};
      f = std::move(g);
    }
    return f;
  }

  Formula parse_implies() {
    Formula f = parse_or();
    if (p.is_punct("=>")) {
      p.next();
      return Formula::implies(std::move(f), parse_implies());
    }
    return f;
  }

  Formula parse_iff() {
    Formula f = parse_implies();
    while (p.is_punct("<=>")) {
      p.next();
      f = Formula::iff(std::move(f), parse_implies());
    }
    return f;
  }

  PropertyFile run_file() {
    PropertyFile pf;
    while (!p.at_end()) {
      p.expect_kw("property");
      NamedProperty np;
      np.name = p.ident("property name");
      if (p.eat_kw("invariant"))
        np.mode = PropMode::Invariant;
      else if (p.eat_kw("terminal"))
        np.mode = PropMode::Terminal;
      else
        p.fail("expected 'invariant' or 'terminal'");
      p.expect_punct(":");
      np.formula = parse_iff();
      pf.props.push_back(std::move(np));
    }
    if (pf.props.empty()) p.fail("empty property file");
    return pf;
  }
};

}  // namespace

PropertyFile parse_property_file(const std::string& text,
                                 const ProtocolSpec& spec,
                                 const Scenario& scn) {
  PropParser pp(text, spec, scn);
  return pp.run_file();
}

Formula parse_formula(const std::string& text, const ProtocolSpec& spec,
                      const Scenario& scn) {
  PropParser pp(text, spec, scn);
  if (pp.p.eat_kw("invariant") || pp.p.eat_kw("terminal"))
    pp.p.expect_punct(":");
  Formula f = pp.parse_iff();
  if (!pp.p.at_end()) pp.p.fail("trailing input after formula");
  return f;
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

// Alias back-substitution: first declared name wins.
std::map<Term, std::string, TermLess> alias_names(const ProtocolSpec& spec,
                                                  size_t upto) {
  std::map<Term, std::string, TermLess> m;
  for (size_t i = 0; i < upto && i < spec.aliases.size(); ++i)
    m.emplace(spec.aliases[i].value, spec.aliases[i].name);
  return m;
}

void render_named_rec(Term t, const std::map<Term, std::string, TermLess>& m,
                      bool pair_parens, std::string& out) {
  auto it = m.find(t);
  if (it != m.end()) {
    out += it->second;
    return;
  }
  switch (t.tag()) {
    case Tag::Pair: {
      if (pair_parens) out += '(';
      render_named_rec(t.child0(), m, true, out);
      out += '.';
      render_named_rec(t.child1(), m, false, out);
      if (pair_parens) out += ')';
      return;
    }
    case Tag::SEnc:
    case Tag::AEnc: {
      out += '{';
      render_named_rec(t.child0(), m, false, out);
      out += '}';
      Term k = t.child1();
      if (k.is_atom() || k.is_var() || k.tag() == Tag::Pk ||
          m.count(k) != 0) {
        render_named_rec(k, m, true, out);
      } else {
        out += '(';
        render_named_rec(k, m, false, out);
        out += ')';
      }
      return;
    }
    case Tag::Sign: {
      out += "sig(";
      Term key = t.child1();
      if (key.is_var())
        render_named_rec(key, m, false, out);
      else
        render_named_rec(key.child0().child0(), m, false, out);
      out += ", ";
      render_named_rec(t.child0(), m, false, out);
      out += ')';
      return;
    }
    case Tag::Hash:
      out += "h(";
      render_named_rec(t.child0(), m, false, out);
      out += ')';
      return;
    case Tag::Pk:
      out += "pk(";
      render_named_rec(t.child0(), m, false, out);
      out += ')';
      return;
    case Tag::Inv:
      out += "inv(";
      render_named_rec(t.child0(), m, false, out);
      out += ')';
      return;
    case Tag::Var:
      // Protocol-level identifiers render bare; ad-hoc vars keep the marker.
      out += t.name();
      return;
    case Tag::Atom:
      out += t.name();
      return;
  }
}

void render_tf_rec(const TermFormula& f,
                   const std::map<Term, std::string, TermLess>& m,
                   const ProtocolSpec& spec, int parent_prec,
                   std::string& out, bool collapse_evidence = true) {
  if (collapse_evidence) {
    for (const auto& ev : spec.evidences) {
      if (ev.formula == f) {
        out += ev.name;
        return;
      }
    }
  }
  switch (f.kind) {
    case TermFormula::Kind::Leaf:
      render_named_rec(f.leaf, m, false, out);
      return;
    case TermFormula::Kind::Not:
      out += "not ";
      render_tf_rec(f.kids[0], m, spec, 3, out, collapse_evidence);
      return;
    case TermFormula::Kind::And: {
      bool parens = parent_prec > 2;
      if (parens) out += '(';
      for (size_t i = 0; i < f.kids.size(); ++i) {
        if (i) out += " and ";
        render_tf_rec(f.kids[i], m, spec, 2, out, collapse_evidence);
      }
      if (parens) out += ')';
      return;
    }
    case TermFormula::Kind::Or: {
      bool parens = parent_prec > 1;
      if (parens) out += '(';
      for (size_t i = 0; i < f.kids.size(); ++i) {
        if (i) out += " or ";
        render_tf_rec(f.kids[i], m, spec, 1, out, collapse_evidence);
      }
      if (parens) out += ')';
      return;
    }
  }
}

}  // namespace

std::string render_named(Term t, const ProtocolSpec& spec) {
  auto m = alias_names(spec, spec.aliases.size());
  std::string out;
  render_named_rec(t, m, false, out);
  return out;
}

std::string render_term_formula(const TermFormula& f, const ProtocolSpec& spec,
                                bool collapse_evidence) {
  auto m = alias_names(spec, spec.aliases.size());
  std::string out;
  render_tf_rec(f, m, spec, 0, out, collapse_evidence);
  return out;
}

std::string render_formula(const Formula& f, const ProtocolSpec& spec,
                           bool collapse_evidence) {
  std::string out;
  auto m = alias_names(spec, spec.aliases.size());
  // Precedence: iff 1, implies 2, or 3, and 4, not/leaf 5.
  std::function<void(const Formula&, int)> rec = [&](const Formula& g,
                                                     int parent) {
    auto wrap = [&](int mine, auto body) {
      bool parens = parent > mine;
      if (parens) out += '(';
      body();
      if (parens) out += ')';
    };
    switch (g.kind) {
      case Formula::Kind::Const:
        out += g.cval ? "true" : "false";
        return;
      case Formula::Kind::Aknows:
        out += "aknows(" + g.role + ", " + g.session + ", ";
        render_tf_rec(g.tf, m, spec, 0, out, collapse_evidence);
        out += ')';
        return;
      case Formula::Kind::Deduce:
        out += "deduce(" + g.role + ", " + g.session + ", ";
        render_tf_rec(g.tf, m, spec, 0, out, collapse_evidence);
        out += ')';
        return;
      case Formula::Kind::Auth:
        out += "auth(" + g.role + ", " + g.peer + ", ";
        render_named_rec(g.auth_data, m, false, out);
        out += ')';
        return;
      case Formula::Kind::Not:
        wrap(5, [&] {
          out += "not ";
          rec(g.kids[0], 5);
        });
        return;
      case Formula::Kind::And:
        wrap(4, [&] {
          for (size_t i = 0; i < g.kids.size(); ++i) {
            if (i) out += " and ";
            rec(g.kids[i], 4);
          }
        });
        return;
      case Formula::Kind::Or:
        wrap(3, [&] {
          for (size_t i = 0; i < g.kids.size(); ++i) {
            if (i) out += " or ";
            rec(g.kids[i], 3);
          }
        });
        return;
      case Formula::Kind::Implies:
        wrap(2, [&] {
          rec(g.kids[0], 3);
          out += " => ";
          rec(g.kids[1], 2);
        });
        return;
      case Formula::Kind::Iff:
        wrap(1, [&] {
          rec(g.kids[0], 2);
          out += " <=> ";
          rec(g.kids[1], 2);
        });
        return;
    }
  };
  rec(f, 0);
  return out;
}

namespace {

void render_attachments(const std::vector<Attachment>& atts,
                        const std::map<Term, std::string, TermLess>& m,
                        const std::string& indent, std::ostringstream& os) {
  for (const auto& a : atts) {
    os << indent;
    switch (a.kind) {
      case Attachment::Kind::Annotate: {
        os << "annotate " << a.role << " knows ";
        for (size_t i = 0; i < a.terms.size(); ++i) {
          if (i) os << ", ";
          std::string s;
          render_named_rec(a.terms[i], m, false, s);
          os << s;
        }
        break;
      }
      case Attachment::Kind::Witness: {
        std::string s;
        render_named_rec(a.data, m, false, s);
        os << "witness " << a.role << " for " << a.peer << " : " << s;
        break;
      }
      case Attachment::Kind::Request: {
        std::string s;
        render_named_rec(a.data, m, false, s);
        os << "request " << a.role << " of " << a.peer << " : " << s;
        break;
      }
    }
    os << "\n";
  }
}

void render_arm(const BranchArm& arm, bool then_arm,
                const std::map<Term, std::string, TermLess>& m,
                std::ostringstream& os) {
  std::string reply;
  render_named_rec(arm.reply, m, false, reply);
  os << "       " << (then_arm ? "then" : "else") << " reply " << reply
     << "\n";
  render_attachments(arm.attachments, m, "         ", os);
  if (arm.store) {
    std::string key;
    render_named_rec(arm.store->key, m, false, key);
    os << "         store " << (arm.store->resolved ? "resolved" : "aborted")
       << "(" << key << ")\n";
  }
}

void render_exchange(const Exchange& ex,
                     const std::map<Term, std::string, TermLess>& m,
                     std::ostringstream& os) {
  os << "  " << ex.number << ". " << ex.from << (ex.fetch ? " <-> " : " -> ")
     << ex.to << " : ";
  if (ex.branch) {
    const BranchSpec& br = *ex.branch;
    std::string key;
    render_named_rec(br.key, m, false, key);
    os << "branch " << (br.on_resolved ? "resolved" : "aborted") << "(" << key
       << ")\n";
    render_arm(br.then_arm, true, m, os);
    render_arm(br.else_arm, false, m, os);
    return;
  }
  std::string payload;
  render_named_rec(ex.payload, m, false, payload);
  os << payload;
  if (ex.fetch) {
    std::string q;
    render_named_rec(ex.query, m, false, q);
    os << " query " << q;
  }
  os << "\n";
  render_attachments(ex.attachments, m, "       ", os);
}

}  // namespace

std::string render_protocol(const ProtocolSpec& spec) {
  std::ostringstream os;
  os << "protocol " << spec.name << "\n\n";
  os << "roles";
  for (const auto& r : spec.roles) os << " " << r;
  os << "\n";
  if (spec.ttp_role) os << "ttp " << *spec.ttp_role << "\n";
  if (!spec.labels.empty()) {
    os << "labels";
    for (const auto& l : spec.labels) os << " " << l;
    os << "\n";
  }
  for (const auto& f : spec.fresh)
    os << "fresh " << f.role << " : " << f.name << " " << to_string(f.kind)
       << "\n";
  for (size_t i = 0; i < spec.aliases.size(); ++i) {
    auto m = alias_names(spec, i);
    std::string body;
    render_named_rec(spec.aliases[i].value, m, false, body);
    os << "alias " << spec.aliases[i].name << " = " << body << "\n";
  }
  for (const auto& [key, model] : spec.channels)
    os << "channel " << key.first << " " << key.second << " "
       << (model == ChannelModel::Secure ? "secure" : "dy") << "\n";
  auto m = alias_names(spec, spec.aliases.size());
  os << "\nmain:\n";
  for (const auto& ex : spec.main_lines) render_exchange(ex, m, os);
  for (const auto& sub : spec.subs) {
    os << "\nsub " << sub.name << " by ";
    for (size_t i = 0; i < sub.entries.size(); ++i) {
      if (i) os << ", ";
      os << sub.entries[i].role << " when waiting main."
         << sub.entries[i].waiting_line;
    }
    os << " :\n";
    for (const auto& ex : sub.lines) render_exchange(ex, m, os);
  }
  os << "\n";
  // Evidence bodies render without evidence-name back-substitution so a
  // definition never prints as its own name.
  ProtocolSpec stripped = spec;
  stripped.evidences.clear();
  for (const auto& ev : spec.evidences) {
    std::string s;
    render_tf_rec(ev.formula, m, stripped, 0, s);
    os << "evidence " << ev.name << " for " << ev.owner << " against "
       << ev.against << " protects " << ev.protects << " := " << s << "\n";
  }
  return os.str();
}

}  // namespace faircheck
