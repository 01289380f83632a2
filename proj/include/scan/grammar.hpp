#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace scan {

// SCAN command language. Commands are generated by the phrase-structure
// grammar
//
//   C -> S and S | S after S | S
//   S -> V twice | V thrice | V
//   V -> D[1] opposite D[2] | D[1] around D[2] | D | U
//   D -> U left | U right | turn left | turn right
//   U -> walk | look | run | jump
//
// where D[1]/D[2] denote the verb and direction parts of a D phrase, so
// "opposite"/"around" are infixed between them ("jump opposite left" comes
// from D = "jump left"). The language is finite and unambiguous.

inline constexpr std::array<std::string_view, 13> kCommandVocabulary = {
    "after", "and",      "around", "jump", "left",  "look",  "opposite",
    "right", "run",      "thrice", "turn", "twice", "walk"};

enum class ActionSymbol : std::uint8_t {
  kWalk = 0,
  kLook,
  kRun,
  kJump,
  kTurnLeft,
  kTurnRight,
};

inline constexpr std::array<std::string_view, 6> kActionNames = {
    "WALK", "LOOK", "RUN", "JUMP", "LTURN", "RTURN"};

inline std::string_view to_string(ActionSymbol a) {
  return kActionNames[static_cast<std::size_t>(a)];
}

struct UnknownWordError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotInGrammarError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// U category.
enum class Primitive : std::uint8_t { kWalk = 0, kLook, kRun, kJump };
inline constexpr std::array<std::string_view, 4> kPrimitiveNames = {
    "walk", "look", "run", "jump"};

enum class TurnDirection : std::uint8_t { kLeft = 0, kRight };

// One V phrase. The D category is held split into its verb part (a primitive
// or bare "turn") and its direction part, which is what lets the kOpposite /
// kAround shapes infix their modifier word.
struct VerbPhrase {
  enum class Form : std::uint8_t {
    kBare = 0,   // V -> U                 ("jump")
    kDirected,   // V -> D                 ("jump left", "turn left")
    kOpposite,   // V -> D[1] opposite D[2]("jump opposite left")
    kAround,     // V -> D[1] around D[2]  ("jump around left")
  };

  Form form = Form::kBare;
  bool is_turn = false;  // verb part is "turn"; only valid with a direction
  Primitive primitive = Primitive::kWalk;  // meaningful when !is_turn
  TurnDirection direction = TurnDirection::kLeft;  // meaningful unless kBare

  bool operator==(const VerbPhrase&) const = default;
};

// S category: a verb phrase with a repetition count (1 = bare, 2 = "twice",
// 3 = "thrice").
struct Segment {
  VerbPhrase phrase;
  int repeat = 1;

  bool operator==(const Segment&) const = default;
};

// C category: the full derivation of one command.
struct ParseTree {
  enum class Conjunction : std::uint8_t { kNone = 0, kAnd, kAfter };

  Conjunction conjunction = Conjunction::kNone;
  Segment left;
  Segment right;  // unused when conjunction == kNone

  bool operator==(const ParseTree&) const = default;
};

// A command with its ground-truth action sequence, both stored as canonical
// single-space separated text (commands lowercase, actions uppercase).
struct ScanPair {
  std::string command;
  std::string actions;

  bool operator==(const ScanPair&) const = default;
};

std::vector<std::string> split_tokens(std::string_view text);
std::string join_tokens(const std::vector<std::string>& tokens);

// Left-to-right leaf words of a derivation.
std::vector<std::string> yield_tokens(const ParseTree& tree);
std::string yield_text(const ParseTree& tree);

// Unique derivation of a command. Throws UnknownWordError if a token is
// outside the 13-word vocabulary, NotInGrammarError if the sequence is not
// one of the 20,910 commands.
ParseTree parse(const std::vector<std::string>& tokens);
ParseTree parse_text(std::string_view command);

// Compositional interpretation (the double-bracket rules). Total on valid
// trees; output length is in [1, 48].
std::vector<ActionSymbol> interpret(const ParseTree& tree);
std::string action_text(const std::vector<ActionSymbol>& actions);

// Every derivation of the grammar exactly once, ordered lexicographically by
// space-joined yield.
std::vector<ParseTree> enumerate_commands();

// enumerate + interpret: the full 20,910-pair dataset in canonical order.
std::vector<ScanPair> build_dataset();

inline int command_length(const ScanPair& p) {
  int n = 1;
  for (char c : p.command) n += (c == ' ');
  return n;
}

inline int action_length(const ScanPair& p) {
  int n = 1;
  for (char c : p.actions) n += (c == ' ');
  return n;
}

}  // namespace scan
