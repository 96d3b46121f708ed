#include <gtest/gtest.h>

#include <random>

#include "discovery/error.hpp"
#include "discovery/ontology.hpp"
#include "discovery/text.hpp"
#include "fixtures.hpp"

using namespace discovery;

namespace {

const char* kBase = "https://dbpedia.org/ontology/";

Ontology with(std::initializer_list<const char*> classes,
              std::initializer_list<const char*> properties = {}) {
  Ontology o;
  for (const auto* c : classes) o.add(make_term(std::string(kBase) + c, TermKind::Class));
  for (const auto* p : properties) o.add(make_term(std::string(kBase) + p, TermKind::Property));
  return o;
}

// Argmax by brute force over the term list with the same tie rule.
std::string oracle_nearest(const Ontology& o, TermKind kind, const std::string& label) {
  std::string best;
  double best_score = -1.0;
  for (const auto& t : o.terms(kind)) {
    const double s = label_similarity(label, t.local_name);
    if (s > best_score || (s == best_score && t.local_name < best)) {
      best = t.local_name;
      best_score = s;
    }
  }
  return best;
}

}  // namespace

TEST(LoadOntology, Examples) {
  const auto one = load_ontology("https://dbpedia.org/ontology/Hospital\n",
                                 OntologyFormat::LineDelimitedIri);
  ASSERT_EQ(one.classes().size(), 1u);
  EXPECT_EQ(one.classes()[0].local_name, "Hospital");
  EXPECT_EQ(one.classes()[0].kind, TermKind::Class);

  const auto empty = load_ontology("", OntologyFormat::LineDelimitedIri);
  EXPECT_TRUE(empty.classes().empty());
  EXPECT_TRUE(empty.properties().empty());
}

TEST(LoadOntology, CaseInsensitiveDuplicate) {
  try {
    load_ontology("https://dbpedia.org/ontology/Airport\nhttps://dbpedia.org/ontology/airport\n",
                  OntologyFormat::LineDelimitedIri);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DuplicateTerm);
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(LoadOntology, SameNameAcrossKindsIsAllowed) {
  const auto o = load_ontology("C\thttps://dbpedia.org/ontology/Country\n"
                               "P\thttps://dbpedia.org/ontology/country\n",
                               OntologyFormat::TabSeparatedKindIri);
  EXPECT_EQ(o.classes().size(), 1u);
  EXPECT_EQ(o.properties().size(), 1u);
}

TEST(LoadOntology, MalformedIriReportsLine) {
  for (const char* bad : {"# c\n\nfoo/bar\n", "\n\nhttps://dbpedia.org/ontology/\n",
                          "\n\nhttps://dbpedia.org/ont ology/X\n"}) {
    try {
      load_ontology(bad, OntologyFormat::LineDelimitedIri);
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::MalformedIri);
      EXPECT_EQ(e.line(), 3u);
    }
  }
}

TEST(LoadOntology, TabFormatSkipsCommentsAndTagsKinds) {
  const auto o = fixtures::ontology();
  EXPECT_EQ(o.classes().size(), 19u);
  EXPECT_EQ(o.properties().size(), 17u);
  ASSERT_TRUE(lookup(o, TermKind::Property, "conservationStatus"));
  EXPECT_FALSE(lookup(o, TermKind::Class, "conservationStatus"));
}

TEST(NormalizeLabel, Examples) {
  const Ontology o;
  EXPECT_EQ(normalize_label("`https://dbpedia.org/ontology/Hospital`", o), "Hospital");
  EXPECT_EQ(normalize_label("dbo:author", o), "author");
  EXPECT_EQ(normalize_label("   Airport.  ", o), "Airport");
  EXPECT_EQ(normalize_label("'DBO:title',", o), "title");
  EXPECT_THROW(normalize_label(" `` ", o), Error);
  try {
    normalize_label("\"\"", o);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyLabel);
  }
}

TEST(NormalizeLabel, IsIdempotent) {
  const Ontology o;
  std::mt19937 rng(3);
  const std::string alphabet = "ab:/`'\". ,dbo";
  std::uniform_int_distribution<std::size_t> len(1, 12);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  int checked = 0;
  for (int i = 0; i < 2000; ++i) {
    std::string raw;
    const auto n = len(rng);
    for (std::size_t j = 0; j < n; ++j) raw += alphabet[pick(rng)];
    std::string once;
    try {
      once = normalize_label(raw, o);
    } catch (const Error&) {
      continue;
    }
    ++checked;
    ASSERT_EQ(normalize_label(once, o), once) << raw;
  }
  EXPECT_GT(checked, 500);
}

TEST(Lookup, Examples) {
  const auto o = with({"Hospital"});
  ASSERT_TRUE(lookup(o, TermKind::Class, "hospital"));
  EXPECT_EQ(lookup(o, TermKind::Class, "hospital")->local_name, "Hospital");
  EXPECT_FALSE(lookup(o, TermKind::Class, "iucnStatus"));
  EXPECT_FALSE(lookup(Ontology{}, TermKind::Property, "x"));
}

TEST(NearestTerm, Examples) {
  EXPECT_EQ(nearest_term(with({"Animal", "Airport"}), TermKind::Class, "animalName").term.local_name,
            "Animal");
  const auto exact = nearest_term(with({"Hospital"}), TermKind::Class, "Hospital");
  EXPECT_EQ(exact.term.local_name, "Hospital");
  EXPECT_DOUBLE_EQ(exact.score, 1.0);
  EXPECT_EQ(nearest_term(with({}, {"conservationStatus", "binomial"}), TermKind::Property,
                         "iucnStatus")
                .term.local_name,
            "conservationStatus");
  try {
    nearest_term(with({"Hospital"}), TermKind::Property, "x");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyOntologyKind);
  }
}

TEST(NearestTerm, TiesGoToSmallestLocalName) {
  // "ab" is one edit from both.
  const auto o = with({"ac", "aa"});
  EXPECT_EQ(nearest_term(o, TermKind::Class, "ab").term.local_name, "aa");
}

TEST(NearestTerm, PluggableSimilarity) {
  const auto o = with({"Short", "Muchlonger"});
  const Similarity by_length = [](std::string_view a, std::string_view b) {
    return a.size() == b.size() ? 1.0 : 0.0;
  };
  EXPECT_EQ(nearest_term(o, TermKind::Class, "abcdefghij", by_length).term.local_name,
            "Muchlonger");
}

TEST(NearestTerm, MatchesOracleAndAlwaysLooksUp) {
  const auto o = fixtures::ontology();
  std::mt19937 rng(17);
  std::uniform_int_distribution<int> ch('a', 'z');
  std::uniform_int_distribution<std::size_t> len(0, 14);
  for (int i = 0; i < 300; ++i) {
    std::string q(len(rng), ' ');
    for (auto& c : q) c = static_cast<char>(ch(rng));
    for (const auto kind : {TermKind::Class, TermKind::Property}) {
      const auto got = nearest_term(o, kind, q);
      EXPECT_EQ(got.term.local_name, oracle_nearest(o, kind, q)) << q;
      EXPECT_TRUE(lookup(o, kind, got.term.local_name));
    }
  }
}

TEST(Ontology, CompactUsesRegisteredPrefix) {
  const auto o = fixtures::ontology();
  EXPECT_EQ(o.compact(*lookup(o, TermKind::Property, "author")), "dbo:author");
  const auto other = make_term("http://example.org/x/Thing", TermKind::Class);
  EXPECT_EQ(o.compact(other), "http://example.org/x/Thing");
}
