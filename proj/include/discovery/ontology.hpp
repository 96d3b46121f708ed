#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace discovery {

enum class TermKind { Class, Property };

const char* to_string(TermKind kind);

struct OntologyTerm {
  std::string iri;
  std::string local_name;  // IRI substring after the last '/'
  TermKind kind = TermKind::Class;

  friend bool operator==(const OntologyTerm&, const OntologyTerm&) = default;
};

/// Validates `iri` (http/https scheme, no whitespace, nonempty final path
/// segment) and splits off its local name. Throws MalformedIri.
OntologyTerm make_term(std::string_view iri, TermKind kind);

enum class OntologyFormat {
  LineDelimitedIri,     // one IRI per line, every term a class
  TabSeparatedKindIri,  // "C\t<iri>" or "P\t<iri>"; untagged lines are classes
};

// Flat vocabularies of table classes and column properties. Local names are
// unique per kind, compared case-insensitively.
class Ontology {
 public:
  // Starts with the "dbo:" prefix registered.
  Ontology();

  /// Adds a term; throws DuplicateTerm on a case-insensitive local-name clash
  /// within the same kind.
  void add(OntologyTerm term);

  void add_prefix(std::string short_prefix, std::string iri_prefix);

  const std::vector<OntologyTerm>& terms(TermKind kind) const;
  const std::vector<OntologyTerm>& classes() const { return terms(TermKind::Class); }
  const std::vector<OntologyTerm>& properties() const { return terms(TermKind::Property); }

  // Short prefix ("dbo:") to IRI prefix.
  const std::map<std::string, std::string>& namespace_prefixes() const { return prefixes_; }

  /// Case-insensitive exact match on local names of one kind.
  std::optional<OntologyTerm> find(TermKind kind, std::string_view canonical) const;

  /// Short form of a term IRI ("dbo:author") when a registered prefix covers
  /// it, else the full IRI.
  std::string compact(const OntologyTerm& term) const;

 private:
  std::vector<OntologyTerm> classes_;
  std::vector<OntologyTerm> properties_;
  std::unordered_map<std::string, std::size_t> class_index_;
  std::unordered_map<std::string, std::size_t> property_index_;
  std::map<std::string, std::string> prefixes_;
};

/// One term per non-blank line; '#' lines are comments. Errors carry the
/// 1-based line number.
Ontology load_ontology(std::string_view source, OntologyFormat format);
Ontology load_ontology_file(const std::filesystem::path& path,
                            OntologyFormat format = OntologyFormat::TabSeparatedKindIri);

/// Reduces model text to a bare label: strips whitespace, backticks, quotes,
/// trailing '.'/',', any registered short prefix and any IRI path. Applied to
/// a fixed point, so it is idempotent. Throws EmptyLabel.
std::string normalize_label(std::string_view raw, const Ontology& ontology);

std::optional<OntologyTerm> lookup(const Ontology& ontology, TermKind kind,
                                   std::string_view canonical);

using Similarity = std::function<double(std::string_view, std::string_view)>;

struct ScoredTerm {
  OntologyTerm term;
  double score = 0.0;
};

/// Highest-similarity term of `kind`; ties go to the lexicographically
/// smallest local name. The default similarity is `label_similarity`.
/// Throws EmptyOntologyKind.
ScoredTerm nearest_term(const Ontology& ontology, TermKind kind, std::string_view canonical,
                        const Similarity& similarity = {});

}  // namespace discovery
