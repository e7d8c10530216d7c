// Tags one CoNLL-U sentence (with an inline "# constituency" comment) in all
// four modes against a taxonomy.
//
//   tag_sentence taxonomy.tsv sentence.conllu

#include <fstream>
#include <iostream>

#include "legaltag/legaltag.hpp"

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: " << argv[0] << " taxonomy.tsv sentence.conllu\n";
    return 2;
  }
  try {
    std::ifstream tx(argv[1]), cs(argv[2]);
    auto taxonomy = legaltag::load_concept_tree(tx);
    auto sentences = legaltag::read_conllu(cs);
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      std::cout << sentences[i].text << '\n';
      for (auto mode : legaltag::kAllTagModes)
        for (const auto& t : legaltag::generate(sentences[i], taxonomy, mode))
          std::cout << "  " << legaltag::to_string(mode) << "\t" << t.text << "\t[" << t.matched_term
                    << "]\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
