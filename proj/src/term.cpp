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

#include "faircheck/term.hpp"

#include <algorithm>
#include <deque>
#include <mutex>
#include <unordered_map>

namespace faircheck {

const char* to_string(AtomKind k) {
  switch (k) {
    case AtomKind::Agent: return "agent";
    case AtomKind::Nonce: return "nonce";
    case AtomKind::SymKey: return "symkey";
    case AtomKind::Payload: return "payload";
    case AtomKind::Label: return "label";
    case AtomKind::Constant: return "constant";
  }
  return "?";
}

std::optional<AtomKind> atom_kind_from_string(const std::string& s) {
  if (s == "agent") return AtomKind::Agent;
  if (s == "nonce") return AtomKind::Nonce;
  if (s == "symkey") return AtomKind::SymKey;
  if (s == "payload") return AtomKind::Payload;
  if (s == "label") return AtomKind::Label;
  if (s == "constant") return AtomKind::Constant;
  return std::nullopt;
}

namespace {

uint64_t mix64(uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t hash_str(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

uint64_t node_hash(const TermNode& n) {
  uint64_t h = mix64(static_cast<uint64_t>(n.tag) * 0x100 +
                     static_cast<uint64_t>(n.kind) * 2 + (n.sorted ? 1 : 0));
  if (n.tag == Tag::Atom || n.tag == Tag::Var) {
    h = mix64(h ^ hash_str(n.name));
    if (n.origin) {
      h = mix64(h ^ (static_cast<uint64_t>(n.origin->session) + 0x51));
      h = mix64(h ^ hash_str(n.origin->role));
    }
  }
  if (n.child0) h = mix64(h ^ n.child0->shash);
  if (n.child1) h = mix64(h ^ (n.child1->shash + 0x9e3779b97f4a7c15ULL));
  return h;
}

bool node_content_eq(const TermNode& a, const TermNode& b) {
  return a.tag == b.tag && a.kind == b.kind && a.sorted == b.sorted &&
         a.name == b.name && a.origin == b.origin && a.child0 == b.child0 &&
         a.child1 == b.child1;
}

}  // namespace

struct TermInterner {
  std::mutex mu;
  std::unordered_multimap<uint64_t, const TermNode*> table;
  std::deque<TermNode> storage;  // stable addresses

  static TermInterner& instance() {
    static TermInterner it;
    return it;
  }

  Term intern(TermNode n) {
    n.shash = node_hash(n);
    std::lock_guard<std::mutex> lock(mu);
    auto range = table.equal_range(n.shash);
    for (auto it = range.first; it != range.second; ++it) {
      if (node_content_eq(*it->second, n)) return Term(it->second);
    }
    storage.push_back(std::move(n));
    const TermNode* p = &storage.back();
    table.emplace(p->shash, p);
    return Term(p);
  }
};

Term Term::child0() const { return Term(node_->child0); }
Term Term::child1() const { return Term(node_->child1); }

Term Term::atom(AtomKind k, const std::string& name,
                std::optional<Origin> origin) {
  TermNode n;
  n.tag = Tag::Atom;
  n.kind = k;
  n.name = name;
  n.origin = std::move(origin);
  n.ground = true;
  return TermInterner::instance().intern(std::move(n));
}

Term Term::var(const std::string& name, std::optional<AtomKind> sort) {
  TermNode n;
  n.tag = Tag::Var;
  n.name = name;
  if (sort) {
    n.sorted = true;
    n.kind = *sort;
  }
  n.ground = false;
  return TermInterner::instance().intern(std::move(n));
}

namespace {
Term intern2(Tag tag, Term c0, Term c1) {
  TermNode n;
  n.tag = tag;
  n.child0 = &c0.node();
  n.child1 = c1.null() ? nullptr : &c1.node();
  n.ground = c0.is_ground() && (c1.null() || c1.is_ground());
  return TermInterner::instance().intern(std::move(n));
}
}  // namespace

Term Term::pair(Term l, Term r) { return intern2(Tag::Pair, l, r); }

Term Term::senc(Term body, Term key) { return intern2(Tag::SEnc, body, key); }

Term Term::aenc(Term body, Term key) {
  if (!(key.tag() == Tag::Pk || key.is_var()))
    throw TermError("aenc key must be a public key or a variable");
  return intern2(Tag::AEnc, body, key);
}

Term Term::sign(Term body, Term key) {
  bool ok = key.is_var() ||
            (key.tag() == Tag::Inv && (key.child0().tag() == Tag::Pk ||
                                       key.child0().is_var()));
  if (!ok) throw TermError("sign key must be inv(pk(_)) or a variable");
  return intern2(Tag::Sign, body, key);
}

Term Term::hash(Term body) { return intern2(Tag::Hash, body, Term()); }

Term Term::pk(Term agent) {
  if (!(agent.is_var() ||
        (agent.is_atom() && agent.kind() == AtomKind::Agent)))
    throw TermError("pk argument must be an agent atom or a variable");
  return intern2(Tag::Pk, agent, Term());
}

Term Term::inv(Term key) {
  if (!(key.tag() == Tag::Pk || key.is_var()))
    throw TermError("inv applies only to pk(_) or a variable");
  return intern2(Tag::Inv, key, Term());
}

Term Term::dots(const std::vector<Term>& parts) {
  if (parts.empty()) throw TermError("empty dot list");
  Term acc = parts.back();
  for (size_t i = parts.size() - 1; i-- > 0;) acc = pair(parts[i], acc);
  return acc;
}

int term_compare(Term a, Term b) {
  if (a == b) return 0;
  const TermNode& x = a.node();
  const TermNode& y = b.node();
  if (x.tag != y.tag) return x.tag < y.tag ? -1 : 1;
  if (x.tag == Tag::Atom || x.tag == Tag::Var) {
    if (x.kind != y.kind) return x.kind < y.kind ? -1 : 1;
    if (x.sorted != y.sorted) return x.sorted < y.sorted ? -1 : 1;
    if (int c = x.name.compare(y.name)) return c < 0 ? -1 : 1;
    if (x.origin != y.origin) return x.origin < y.origin ? -1 : 1;
    return 0;
  }
  if (int c = term_compare(a.child0(), b.child0())) return c;
  bool xn = x.child1 == nullptr, yn = y.child1 == nullptr;
  if (xn != yn) return xn ? -1 : 1;
  if (xn) return 0;
  return term_compare(a.child1(), b.child1());
}

namespace {
void collect_subterms(Term t, std::vector<Term>& out) {
  out.push_back(t);
  const TermNode& n = t.node();
  if (n.child0) collect_subterms(t.child0(), out);
  if (n.child1) collect_subterms(t.child1(), out);
}
}  // namespace

std::vector<Term> subterms(Term t) {
  std::vector<Term> out;
  collect_subterms(t, out);
  std::sort(out.begin(), out.end(), TermLess{});
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Term> vars_of(Term t) {
  std::vector<Term> out;
  for (Term s : subterms(t))
    if (s.is_var()) out.push_back(s);
  return out;
}

Term Binding::get(const std::string& name) const {
  auto it = map_.find(name);
  if (it == map_.end()) throw TermError("unbound variable " + name);
  return it->second;
}

bool Binding::bind(const std::string& name, Term value) {
  auto [it, inserted] = map_.emplace(name, value);
  return inserted || it->second == value;
}

Term substitute(Term p, const Binding& b) {
  if (p.is_ground()) return p;
  const TermNode& n = p.node();
  switch (n.tag) {
    case Tag::Var: {
      if (!b.has(n.name)) return p;
      Term v = b.get(n.name);
      if (n.sorted && !(v.is_atom() && v.kind() == n.kind))
        throw TermError("sort mismatch binding " + n.name + " to " + render(v));
      return v;
    }
    case Tag::Pair:
      return Term::pair(substitute(p.child0(), b), substitute(p.child1(), b));
    case Tag::SEnc:
      return Term::senc(substitute(p.child0(), b), substitute(p.child1(), b));
    case Tag::AEnc:
      return Term::aenc(substitute(p.child0(), b), substitute(p.child1(), b));
    case Tag::Sign:
      return Term::sign(substitute(p.child0(), b), substitute(p.child1(), b));
    case Tag::Hash:
      return Term::hash(substitute(p.child0(), b));
    case Tag::Pk:
      return Term::pk(substitute(p.child0(), b));
    case Tag::Inv:
      return Term::inv(substitute(p.child0(), b));
    case Tag::Atom:
      return p;
  }
  return p;
}

bool match(Term p, Term t, Binding& b) {
  if (!t.is_ground()) throw TermError("match target must be ground");
  const TermNode& n = p.node();
  if (n.tag == Tag::Var) {
    if (n.sorted && !(t.is_atom() && t.kind() == n.kind)) return false;
    return b.bind(n.name, t);
  }
  if (p.is_ground()) return p == t;
  if (n.tag != t.tag()) return false;
  if (!match(p.child0(), t.child0(), b)) return false;
  if (n.child1) return match(p.child1(), t.child1(), b);
  return true;
}

namespace {

void render_rec(Term t, const RenderOpts& o, bool pair_needs_parens,
                std::string& out);

void render_key(Term k, const RenderOpts& o, std::string& out) {
  // Key position after a closing brace: bare atom/var and pk(_) are
  // unambiguous, anything else is parenthesized.
  if (k.is_atom() || k.is_var() || k.tag() == Tag::Pk || k.tag() == Tag::Inv) {
    render_rec(k, o, true, out);
  } else {
    out += '(';
    render_rec(k, o, false, out);
    out += ')';
  }
}

void render_rec(Term t, const RenderOpts& o, bool pair_needs_parens,
                std::string& out) {
  const TermNode& n = t.node();
  switch (n.tag) {
    case Tag::Atom:
      out += n.name;
      if (o.origins && n.origin) {
        out += '@';
        out += n.origin->role;
        out += '#';
        out += std::to_string(n.origin->session);
      }
      return;
    case Tag::Var:
      out += '?';
      out += n.name;
      return;
    case Tag::Pair: {
      if (pair_needs_parens) out += '(';
      render_rec(t.child0(), o, true, out);
      out += '.';
      render_rec(t.child1(), o, false, out);
      if (pair_needs_parens) out += ')';
      return;
    }
    case Tag::SEnc:
    case Tag::AEnc:
      out += '{';
      render_rec(t.child0(), o, false, out);
      out += '}';
      render_key(t.child1(), o, out);
      return;
    case Tag::Sign: {
      out += "sig(";
      Term key = t.child1();
      if (key.is_var()) {
        render_rec(key, o, false, out);
      } else {
        render_rec(key.child0().child0(), o, false, out);  // inv(pk(x)) -> x
      }
      out += ", ";
      render_rec(t.child0(), o, false, out);
      out += ')';
      return;
    }
    case Tag::Hash:
      out += "h(";
      render_rec(t.child0(), o, false, out);
      out += ')';
      return;
    case Tag::Pk:
      out += "pk(";
      render_rec(t.child0(), o, false, out);
      out += ')';
      return;
    case Tag::Inv:
      out += "inv(";
      render_rec(t.child0(), o, false, out);
      out += ')';
      return;
  }
}

}  // namespace

std::string render(Term t, const RenderOpts& opts) {
  std::string out;
  render_rec(t, opts, false, out);
  return out;
}

}  // namespace faircheck
