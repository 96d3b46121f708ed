#include "discovery/ontology.hpp"

#include <algorithm>
#include <cctype>

#include "discovery/error.hpp"
#include "discovery/table.hpp"
#include "discovery/text.hpp"

namespace discovery {

const char* to_string(TermKind kind) {
  return kind == TermKind::Class ? "Class" : "Property";
}

namespace {

bool has_scheme(std::string_view text) {
  return text.starts_with("http://") || text.starts_with("https://");
}

bool has_whitespace(std::string_view text) {
  return std::any_of(text.begin(), text.end(),
                     [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; });
}

}  // namespace

OntologyTerm make_term(std::string_view iri, TermKind kind) {
  if (!has_scheme(iri)) {
    throw Error(ErrorCode::MalformedIri, "IRI lacks an http(s) scheme: '" + std::string(iri) + "'");
  }
  if (has_whitespace(iri)) {
    throw Error(ErrorCode::MalformedIri, "IRI contains whitespace: '" + std::string(iri) + "'");
  }
  const auto slash = iri.rfind('/');
  const auto local = iri.substr(slash + 1);
  if (local.empty() || slash < iri.find("//") + 2) {
    throw Error(ErrorCode::MalformedIri, "IRI has no local name: '" + std::string(iri) + "'");
  }
  return OntologyTerm{std::string(iri), std::string(local), kind};
}

Ontology::Ontology() { prefixes_.emplace("dbo:", "https://dbpedia.org/ontology/"); }

void Ontology::add(OntologyTerm term) {
  auto& terms = term.kind == TermKind::Class ? classes_ : properties_;
  auto& index = term.kind == TermKind::Class ? class_index_ : property_index_;
  auto key = to_lower_ascii(term.local_name);
  if (const auto it = index.find(key); it != index.end()) {
    throw Error(ErrorCode::DuplicateTerm, std::string(to_string(term.kind)) + " '" +
                                              term.local_name + "' collides with '" +
                                              terms[it->second].local_name + "'");
  }
  index.emplace(std::move(key), terms.size());
  terms.push_back(std::move(term));
}

void Ontology::add_prefix(std::string short_prefix, std::string iri_prefix) {
  prefixes_[std::move(short_prefix)] = std::move(iri_prefix);
}

const std::vector<OntologyTerm>& Ontology::terms(TermKind kind) const {
  return kind == TermKind::Class ? classes_ : properties_;
}

std::optional<OntologyTerm> Ontology::find(TermKind kind, std::string_view canonical) const {
  const auto& index = kind == TermKind::Class ? class_index_ : property_index_;
  const auto it = index.find(to_lower_ascii(canonical));
  if (it == index.end()) return std::nullopt;
  return terms(kind)[it->second];
}

std::string Ontology::compact(const OntologyTerm& term) const {
  for (const auto& [short_prefix, iri_prefix] : prefixes_) {
    if (term.iri.size() > iri_prefix.size() && term.iri.starts_with(iri_prefix)) {
      return short_prefix + term.iri.substr(iri_prefix.size());
    }
  }
  return term.iri;
}

Ontology load_ontology(std::string_view source, OntologyFormat format) {
  Ontology ontology;
  std::size_t line_number = 0;
  for (auto line : split(source, '\n')) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto content = trim(line);
    if (content.empty() || content.front() == '#') continue;

    std::string_view iri = content;
    TermKind kind = TermKind::Class;
    if (format == OntologyFormat::TabSeparatedKindIri && content.size() > 2 && content[1] == '\t') {
      if (content[0] == 'C') {
        iri = trim(content.substr(2));
      } else if (content[0] == 'P') {
        kind = TermKind::Property;
        iri = trim(content.substr(2));
      }
    }
    try {
      ontology.add(make_term(iri, kind));
    } catch (const Error& e) {
      throw Error(e.code(), e.what(), line_number);
    }
  }
  return ontology;
}

Ontology load_ontology_file(const std::filesystem::path& path, OntologyFormat format) {
  return load_ontology(read_text_file(path), format);
}

namespace {

bool is_wrapper(char c) { return c == '`' || c == '"' || c == '\''; }
bool is_trailing_punct(char c) { return c == '.' || c == ','; }

std::string_view strip_once(std::string_view label, const Ontology& ontology) {
  label = trim(label);
  while (!label.empty() && (is_wrapper(label.front()))) label.remove_prefix(1);
  while (!label.empty() && (is_wrapper(label.back()) || is_trailing_punct(label.back()))) {
    label.remove_suffix(1);
  }
  label = trim(label);
  for (const auto& [short_prefix, iri_prefix] : ontology.namespace_prefixes()) {
    if (label.size() >= short_prefix.size() &&
        iequals_ascii(label.substr(0, short_prefix.size()), short_prefix)) {
      label.remove_prefix(short_prefix.size());
      break;
    }
  }
  if (has_scheme(label)) {
    const auto slash = label.rfind('/');
    label.remove_prefix(slash + 1);
  }
  return label;
}

}  // namespace

std::string normalize_label(std::string_view raw, const Ontology& ontology) {
  std::string_view label = raw;
  for (;;) {
    const auto next = strip_once(label, ontology);
    if (next == label) break;
    label = next;
  }
  if (label.empty()) {
    throw Error(ErrorCode::EmptyLabel, "nothing left of '" + std::string(raw) + "'");
  }
  return std::string(label);
}

std::optional<OntologyTerm> lookup(const Ontology& ontology, TermKind kind,
                                   std::string_view canonical) {
  return ontology.find(kind, canonical);
}

ScoredTerm nearest_term(const Ontology& ontology, TermKind kind, std::string_view canonical,
                        const Similarity& similarity) {
  const auto& terms = ontology.terms(kind);
  if (terms.empty()) {
    throw Error(ErrorCode::EmptyOntologyKind,
                std::string("ontology has no ") + to_string(kind) + " terms");
  }
  const OntologyTerm* best = nullptr;
  double best_score = -1.0;
  for (const auto& term : terms) {
    const double score = similarity ? similarity(canonical, term.local_name)
                                    : label_similarity(canonical, term.local_name);
    if (best == nullptr || score > best_score ||
        (score == best_score && term.local_name < best->local_name)) {
      best = &term;
      best_score = score;
    }
  }
  return ScoredTerm{*best, best_score};
}

}  // namespace discovery
