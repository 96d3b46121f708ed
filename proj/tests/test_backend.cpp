#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <thread>

#include "discovery/backend.hpp"
#include "discovery/error.hpp"
#include "fixtures.hpp"

using namespace discovery;

namespace {

Conversation user_says(const std::string& text) {
  Conversation c;
  c.append(Role::User, text);
  return c;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(Conversation, EnforcesAlternation) {
  Conversation c;
  EXPECT_EQ(code_of([&] { c.append(Role::Assistant, "a"); }), ErrorCode::InvalidState);
  c.append(Role::User, "q");
  EXPECT_EQ(code_of([&] { c.append(Role::User, "q2"); }), ErrorCode::InvalidState);
  EXPECT_EQ(code_of([&] { c.append(Role::System, "s"); }), ErrorCode::InvalidState);
  c.append(Role::Assistant, "a");
  c.append(Role::User, "q2");
  EXPECT_EQ(c.size(), 3u);
  EXPECT_EQ(code_of([&] { c.append(Role::Assistant, ""); }), ErrorCode::InvalidArgument);

  Conversation s;
  s.append(Role::System, "be brief");
  EXPECT_EQ(code_of([&] { s.append(Role::Assistant, "a"); }), ErrorCode::InvalidState);
  s.append(Role::User, "q");
}

TEST(Conversation, WithLastTextCopies) {
  auto c = user_says("q");
  c.append(Role::Assistant, "a");
  const auto d = c.with_last_text("b");
  EXPECT_EQ(c.back().text, "a");
  EXPECT_EQ(d.back().text, "b");
  EXPECT_EQ(d.size(), c.size());
  EXPECT_EQ(c.prefix(1), user_says("q"));
}

TEST(GenerationParams, Validates) {
  EXPECT_NO_THROW((GenerationParams{0.0, 1}.validate()));
  EXPECT_NO_THROW((GenerationParams{1.0, 256}.validate()));
  EXPECT_THROW((GenerationParams{1.5, 256}.validate()), Error);
  EXPECT_THROW((GenerationParams{-0.1, 256}.validate()), Error);
  EXPECT_THROW((GenerationParams{0.5, 0}.validate()), Error);
}

TEST(ScriptedBackend, Replays) {
  ScriptedBackend b({{std::nullopt, "X"}});
  EXPECT_EQ(b.complete(user_says("anything"), {}).text, "X");
  EXPECT_EQ(b.remaining(), 0u);
  EXPECT_EQ(code_of([&] { b.complete(user_says("again"), {}); }), ErrorCode::BackendExhausted);

  ScriptedBackend empty({});
  EXPECT_EQ(code_of([&] { empty.complete(user_says("q"), {}); }), ErrorCode::BackendExhausted);
}

TEST(ScriptedBackend, MatchGuard) {
  ScriptedBackend b({{std::string("pd.merge"), "x"}});
  try {
    b.complete(user_says("no merge here"), {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MatchFailed);
    EXPECT_NE(std::string(e.what()).find("pd.merge"), std::string::npos);
  }
}

TEST(ScriptedBackend, RequiresUserTurnLast) {
  ScriptedBackend b({{std::nullopt, "x"}});
  auto c = user_says("q");
  c.append(Role::Assistant, "a");
  EXPECT_EQ(code_of([&] { b.complete(c, {}); }), ErrorCode::InvalidState);
  EXPECT_EQ(b.remaining(), 1u);
}

TEST(ScriptedBackend, UsageIsWordCountAndDeterministic) {
  const PriceTable prices{0.001, 0.002};
  auto run = [&] {
    ScriptedBackend b({{std::nullopt, "one two three"}}, prices);
    return b.complete(user_says("a b  c\nd"), {}).usage;
  };
  const auto u = run();
  EXPECT_EQ(u.prompt_tokens, 4u);
  EXPECT_EQ(u.completion_tokens, 3u);
  EXPECT_TRUE(u.estimated);
  EXPECT_EQ(u.wall_time, std::chrono::milliseconds(20));
  // 4 * 0.001/1000 + 3 * 0.002/1000 dollars = 4000 + 6000 nano-dollars.
  EXPECT_EQ(u.cost.nanos, 10000);
  EXPECT_EQ(run(), u);
}

TEST(Transcript, ParsesAndReportsLines) {
  const auto entries = parse_transcript(fixtures::script_line("A") + "\n" +
                                        fixtures::script_line("B", "select one DBpedia.org"));
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_EQ(entries[1].match, std::optional<std::string>("select one DBpedia.org"));

  for (const auto& [text, line] :
       std::vector<std::pair<std::string, std::size_t>>{{"{\"match\": \"x\"}\n", 1},
                                                         {"{\"response\": \"a\"}\n[1]\n", 2},
                                                         {"\n\n{bad json\n", 3},
                                                         {"{\"response\": 3}\n", 1},
                                                         {"{\"response\": \"a\", \"match\": 1}", 1}}) {
    try {
      parse_transcript(text);
      FAIL() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::MalformedTranscript) << text;
      EXPECT_EQ(e.line(), line) << text;
    }
  }
}

TEST(Transcript, TwoLinesAnswerTwice) {
  auto b = load_transcript(fixtures::script_line("1") + fixtures::script_line("2"));
  EXPECT_EQ(b.complete(user_says("q"), {}).text, "1");
  EXPECT_EQ(b.complete(user_says("q"), {}).text, "2");
  EXPECT_THROW(b.complete(user_says("q"), {}), Error);
}

TEST(Transcript, MatchOnTableClassPrompt) {
  auto b = load_transcript(fixtures::script_line("ok", "select one DBpedia.org ontology"));
  const auto prompt = assemble(table_class_prompt(fixtures::ev_table(), std::nullopt, {}));
  EXPECT_EQ(b.complete(user_says(prompt), {}).text, "ok");
}

TEST(Money, PriceArithmetic) {
  // Two usages of 10 + 10 tokens at $0.001 per 1K each way.
  const PriceTable prices{0.001, 0.001};
  Money total = prices.cost(10, 10) + prices.cost(10, 10);
  EXPECT_EQ(total.nanos, 40000);
  EXPECT_DOUBLE_EQ(total.dollars(), 0.00004);
}

TEST(UsageMeter, HundredItemsAtQuarterCent) {
  UsageMeter meter;
  Usage u;
  u.cost = Money::from_dollars(0.00025);  // 0.025 cents
  u.wall_time = std::chrono::milliseconds(10);
  for (int i = 0; i < 100; ++i) meter.add(u);
  const auto r = meter.report();
  EXPECT_EQ(r.items, 100u);
  EXPECT_DOUBLE_EQ(r.total_cost.cents(), 2.5);
  EXPECT_DOUBLE_EQ(r.items_per_second, 100.0);
}

TEST(UsageMeter, EmptyReportsZeroRate) {
  const auto r = UsageMeter{}.report();
  EXPECT_EQ(r.items, 0u);
  EXPECT_EQ(r.total_cost.nanos, 0);
  EXPECT_EQ(r.items_per_second, 0.0);
}

TEST(UsageMeter, PermutationInvariantAndThreadSafe) {
  std::mt19937 rng(9);
  std::uniform_int_distribution<std::uint64_t> tokens(0, 5000);
  const PriceTable prices{0.0015, 0.002};
  std::vector<Usage> usages;
  for (int i = 0; i < 300; ++i) {
    Usage u;
    u.prompt_tokens = tokens(rng);
    u.completion_tokens = tokens(rng);
    u.cost = prices.cost(u.prompt_tokens, u.completion_tokens);
    u.wall_time = std::chrono::microseconds(tokens(rng));
    usages.push_back(u);
  }
  UsageMeter forward;
  for (const auto& u : usages) forward.add(u);
  auto shuffled = usages;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  UsageMeter parallel;
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (std::size_t i = static_cast<std::size_t>(t); i < shuffled.size(); i += 4) {
        parallel.add(shuffled[i]);
      }
    });
  }
  for (auto& t : threads) t.join();
  const auto a = forward.report();
  const auto b = parallel.report();
  EXPECT_EQ(a.total_cost, b.total_cost);
  EXPECT_EQ(a.items, b.items);
  EXPECT_EQ(a.prompt_tokens, b.prompt_tokens);
  EXPECT_EQ(a.wall_time, b.wall_time);
  EXPECT_EQ(a.items_per_second, b.items_per_second);
}
