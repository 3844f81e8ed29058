#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "prestamo/error.h"
#include "prestamo/langid.h"

int main(int argc, char** argv) {
  CLI::App app{"Train the byte n-gram language identifier"};
  std::string output = "model.tsv";
  int order = 3;
  double alpha = 0.5;
  std::vector<std::string> sources;
  app.add_option("--output", output, "Model TSV path")->capture_default_str();
  app.add_option("--order", order, "n-gram order (1..4)")->capture_default_str();
  app.add_option("--alpha", alpha, "Add-alpha smoothing")->capture_default_str();
  app.add_option("sources", sources, "LABEL:FILE with one text per line")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    std::vector<std::pair<std::string, std::string>> labeled;
    for (const std::string& source : sources) {
      std::size_t colon = source.find(':');
      if (colon == std::string::npos || colon == 0) {
        std::cerr << "error: expected LABEL:FILE, got " << source << "\n";
        return 2;
      }
      std::string label = source.substr(0, colon);
      std::string path = source.substr(colon + 1);
      std::ifstream in(path);
      if (!in) {
        std::cerr << "error: cannot open " << path << "\n";
        return 2;
      }
      std::string line;
      while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        labeled.emplace_back(line, label);
      }
    }
    prestamo::LanguageModel model =
        prestamo::train_language_model(labeled, order, alpha);
    prestamo::save_language_model(model, output);
    std::cerr << "trained " << model.classes.size() << " classes from "
              << labeled.size() << " texts\n";
  } catch (const prestamo::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == prestamo::ErrorCode::Config ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
