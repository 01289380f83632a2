#include "scan/grammar.hpp"

#include <algorithm>
#include <optional>
#include <sstream>

namespace scan {

namespace {

ActionSymbol primitive_action(Primitive p) {
  switch (p) {
    case Primitive::kWalk: return ActionSymbol::kWalk;
    case Primitive::kLook: return ActionSymbol::kLook;
    case Primitive::kRun: return ActionSymbol::kRun;
    case Primitive::kJump: return ActionSymbol::kJump;
  }
  throw std::logic_error("bad primitive");
}

ActionSymbol turn_action(TurnDirection d) {
  return d == TurnDirection::kLeft ? ActionSymbol::kTurnLeft
                                   : ActionSymbol::kTurnRight;
}

std::string_view direction_word(TurnDirection d) {
  return d == TurnDirection::kLeft ? "left" : "right";
}

std::optional<Primitive> primitive_from_word(std::string_view w) {
  for (std::size_t i = 0; i < kPrimitiveNames.size(); ++i) {
    if (kPrimitiveNames[i] == w) return static_cast<Primitive>(i);
  }
  return std::nullopt;
}

bool in_vocabulary(std::string_view w) {
  return std::find(kCommandVocabulary.begin(), kCommandVocabulary.end(), w) !=
         kCommandVocabulary.end();
}

void append_phrase_tokens(const VerbPhrase& v, std::vector<std::string>& out) {
  out.emplace_back(v.is_turn ? "turn" : kPrimitiveNames[static_cast<std::size_t>(
                                            v.primitive)]);
  switch (v.form) {
    case VerbPhrase::Form::kBare:
      break;
    case VerbPhrase::Form::kDirected:
      out.emplace_back(direction_word(v.direction));
      break;
    case VerbPhrase::Form::kOpposite:
      out.emplace_back("opposite");
      out.emplace_back(direction_word(v.direction));
      break;
    case VerbPhrase::Form::kAround:
      out.emplace_back("around");
      out.emplace_back(direction_word(v.direction));
      break;
  }
}

void append_segment_tokens(const Segment& s, std::vector<std::string>& out) {
  append_phrase_tokens(s.phrase, out);
  if (s.repeat == 2) out.emplace_back("twice");
  if (s.repeat == 3) out.emplace_back("thrice");
}

// Parses one V phrase spanning tokens [begin, end).
VerbPhrase parse_phrase(const std::vector<std::string>& t, std::size_t begin,
                        std::size_t end) {
  const std::size_t n = end - begin;
  if (n == 0 || n > 3) throw NotInGrammarError("not a verb phrase");

  VerbPhrase v;
  const std::string& head = t[begin];
  if (head == "turn") {
    v.is_turn = true;
  } else if (auto p = primitive_from_word(head)) {
    v.primitive = *p;
  } else {
    throw NotInGrammarError("verb expected: " + head);
  }

  auto direction_from = [&](const std::string& w) {
    if (w == "left") return TurnDirection::kLeft;
    if (w == "right") return TurnDirection::kRight;
    throw NotInGrammarError("direction expected: " + w);
  };

  if (n == 1) {
    v.form = VerbPhrase::Form::kBare;
    if (v.is_turn) throw NotInGrammarError("bare \"turn\" is not a command");
  } else if (n == 2) {
    v.form = VerbPhrase::Form::kDirected;
    v.direction = direction_from(t[begin + 1]);
  } else {
    if (t[begin + 1] == "opposite") {
      v.form = VerbPhrase::Form::kOpposite;
    } else if (t[begin + 1] == "around") {
      v.form = VerbPhrase::Form::kAround;
    } else {
      throw NotInGrammarError("modifier expected: " + t[begin + 1]);
    }
    v.direction = direction_from(t[begin + 2]);
  }
  return v;
}

Segment parse_segment(const std::vector<std::string>& t, std::size_t begin,
                      std::size_t end) {
  if (begin >= end) throw NotInGrammarError("empty conjunct");
  Segment s;
  if (t[end - 1] == "twice") {
    s.repeat = 2;
    --end;
  } else if (t[end - 1] == "thrice") {
    s.repeat = 3;
    --end;
  }
  s.phrase = parse_phrase(t, begin, end);
  return s;
}

void interpret_phrase(const VerbPhrase& v, std::vector<ActionSymbol>& out) {
  const ActionSymbol turn = turn_action(v.direction);
  switch (v.form) {
    case VerbPhrase::Form::kBare:
      out.push_back(primitive_action(v.primitive));
      break;
    case VerbPhrase::Form::kDirected:
      out.push_back(turn);
      if (!v.is_turn) out.push_back(primitive_action(v.primitive));
      break;
    case VerbPhrase::Form::kOpposite:
      out.push_back(turn);
      out.push_back(turn);
      if (!v.is_turn) out.push_back(primitive_action(v.primitive));
      break;
    case VerbPhrase::Form::kAround:
      for (int i = 0; i < 4; ++i) {
        out.push_back(turn);
        if (!v.is_turn) out.push_back(primitive_action(v.primitive));
      }
      break;
  }
}

void interpret_segment(const Segment& s, std::vector<ActionSymbol>& out) {
  for (int i = 0; i < s.repeat; ++i) interpret_phrase(s.phrase, out);
}

std::vector<VerbPhrase> all_phrases() {
  std::vector<VerbPhrase> out;
  for (int pi = 0; pi < 4; ++pi) {
    out.push_back({VerbPhrase::Form::kBare, false, static_cast<Primitive>(pi),
                   TurnDirection::kLeft});
  }
  const std::array<VerbPhrase::Form, 3> directed_forms = {
      VerbPhrase::Form::kDirected, VerbPhrase::Form::kOpposite,
      VerbPhrase::Form::kAround};
  for (VerbPhrase::Form form : directed_forms) {
    for (int di = 0; di < 2; ++di) {
      const auto dir = static_cast<TurnDirection>(di);
      out.push_back({form, true, Primitive::kWalk, dir});
      for (int pi = 0; pi < 4; ++pi) {
        out.push_back({form, false, static_cast<Primitive>(pi), dir});
      }
    }
  }
  return out;
}

std::vector<Segment> all_segments() {
  std::vector<Segment> out;
  for (const VerbPhrase& v : all_phrases()) {
    for (int repeat = 1; repeat <= 3; ++repeat) out.push_back({v, repeat});
  }
  return out;
}

}  // namespace

std::vector<std::string> split_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t j = text.find(' ', i);
    if (j == std::string_view::npos) j = text.size();
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j + 1;
  }
  return out;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::vector<std::string> yield_tokens(const ParseTree& tree) {
  std::vector<std::string> out;
  append_segment_tokens(tree.left, out);
  if (tree.conjunction != ParseTree::Conjunction::kNone) {
    out.emplace_back(tree.conjunction == ParseTree::Conjunction::kAnd
                         ? "and"
                         : "after");
    append_segment_tokens(tree.right, out);
  }
  return out;
}

std::string yield_text(const ParseTree& tree) {
  return join_tokens(yield_tokens(tree));
}

ParseTree parse(const std::vector<std::string>& tokens) {
  if (tokens.empty()) throw NotInGrammarError("empty command");
  for (const std::string& w : tokens) {
    if (!in_vocabulary(w)) throw UnknownWordError("unknown word: " + w);
  }

  std::size_t conj = tokens.size();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] == "and" || tokens[i] == "after") {
      if (conj != tokens.size()) {
        throw NotInGrammarError("more than one conjunction");
      }
      conj = i;
    }
  }

  ParseTree tree;
  if (conj == tokens.size()) {
    tree.left = parse_segment(tokens, 0, tokens.size());
  } else {
    tree.conjunction = tokens[conj] == "and" ? ParseTree::Conjunction::kAnd
                                             : ParseTree::Conjunction::kAfter;
    tree.left = parse_segment(tokens, 0, conj);
    tree.right = parse_segment(tokens, conj + 1, tokens.size());
  }
  return tree;
}

ParseTree parse_text(std::string_view command) {
  return parse(split_tokens(command));
}

std::vector<ActionSymbol> interpret(const ParseTree& tree) {
  std::vector<ActionSymbol> out;
  if (tree.conjunction == ParseTree::Conjunction::kAfter) {
    // [[x1 after x2]] = [[x2]] [[x1]]
    interpret_segment(tree.right, out);
    interpret_segment(tree.left, out);
  } else {
    interpret_segment(tree.left, out);
    if (tree.conjunction == ParseTree::Conjunction::kAnd) {
      interpret_segment(tree.right, out);
    }
  }
  return out;
}

std::string action_text(const std::vector<ActionSymbol>& actions) {
  std::string out;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (i) out += ' ';
    out += to_string(actions[i]);
  }
  return out;
}

std::vector<ParseTree> enumerate_commands() {
  const std::vector<Segment> segments = all_segments();
  std::vector<ParseTree> out;
  out.reserve(2 * segments.size() * segments.size() + segments.size());
  for (const Segment& s : segments) {
    out.push_back({ParseTree::Conjunction::kNone, s, {}});
  }
  for (const Segment& a : segments) {
    for (const Segment& b : segments) {
      out.push_back({ParseTree::Conjunction::kAnd, a, b});
      out.push_back({ParseTree::Conjunction::kAfter, a, b});
    }
  }
  std::vector<std::pair<std::string, std::size_t>> keyed(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) keyed[i] = {yield_text(out[i]), i};
  std::sort(keyed.begin(), keyed.end());
  std::vector<ParseTree> sorted;
  sorted.reserve(out.size());
  for (const auto& [text, idx] : keyed) sorted.push_back(out[idx]);
  return sorted;
}

std::vector<ScanPair> build_dataset() {
  std::vector<ParseTree> trees = enumerate_commands();
  std::vector<ScanPair> out;
  out.reserve(trees.size());
  for (const ParseTree& t : trees) {
    out.push_back({yield_text(t), action_text(interpret(t))});
  }
  return out;
}

}  // namespace scan
