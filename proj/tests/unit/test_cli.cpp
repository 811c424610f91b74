#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <sys/wait.h>
#include <filesystem>
#include <set>
#include <string>

#include "fixtures.hpp"
#include "postag/checkpoint.hpp"
#include "postag/transfer.hpp"

#ifndef POSTAG_CLI
#error "POSTAG_CLI must name the postag executable"
#endif

namespace fs = std::filesystem;
using namespace postag;

namespace {

// Each test works in a fresh directory; the command runs from inside it.
struct Workspace {
  fs::path dir;

  explicit Workspace(const std::string& name) : dir(fixture::temp("cli_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    fs::copy_file(fixture::data("five.conll"), dir / "five.conll");
    write_file(dir / "small.cfg",
               "word_emb_dim=8\nchar_emb_dim=4\nchar_hidden=4\nfeat_emb_dim=4\nlstm_hidden=8\n"
               "dropout_lstm=0.2\ndropout_char=0.2\ndropout_input=0.2\nmax_epochs=3\n");
  }

  int run(const std::string& args) const {
    const std::string cmd = "cd '" + dir.string() + "' && '" POSTAG_CLI "' " + args + " >cli.out 2>cli.err";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string read(const std::string& name) const { return read_file(dir / name); }

  std::set<std::string> files() const {
    std::set<std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) out.insert(e.path().filename().string());
    return out;
  }
};

std::string value_of(const std::string& text, const std::string& key) {
  const auto at = text.find(key + "=");
  REQUIRE(at != std::string::npos);
  const auto start = at + key.size() + 1;
  return text.substr(start, text.find('\n', start) - start);
}

}  // namespace

TEST_CASE("usage errors exit with 2, help with 0") {
  Workspace w("usage");
  CHECK(w.run("--help") == 0);
  CHECK(w.run("") == 2);
  CHECK(w.run("frobnicate") == 2);
  CHECK(w.run("train-source --train missing.conll --dev five.conll --out m.ckpt") == 2);
  CHECK(w.run("train-source --train five.conll --dev five.conll") == 2);
  CHECK(w.run("train-source --train five.conll --dev five.conll --out m.ckpt --set nonsense=1") == 2);
  CHECK(w.run("tag --model five.conll --input five.conll --output x.conll") == 2);
  CHECK(w.run("train-target --train five.conll --dev five.conll --lambda 0.1 --out m.ckpt") == 2);
  CHECK_FALSE(fs::exists(w.dir / "m.ckpt"));
  CHECK_FALSE(fs::exists(w.dir / "x.conll"));
}

TEST_CASE("malformed input is reported with exit code 2") {
  Workspace w("malformed");
  write_file(w.dir / "bad.conll", "a\tX\nb\tY\tZ\n");
  CHECK(w.run("train-crf --train bad.conll --out m.crf") == 2);
  CHECK(w.read("cli.err").find("bad.conll:2") != std::string::npos);
}

TEST_CASE("train-source is reproducible and its checkpoint loads back exactly") {
  Workspace w("source");
  const auto before = w.files();
  REQUIRE(w.run("train-source --train five.conll --dev five.conll --config small.cfg --out a.ckpt --log a.log "
                "--summary a.sum") == 0);
  REQUIRE(w.run("train-source --train five.conll --dev five.conll --config small.cfg --out b.ckpt --log b.log "
                "--summary b.sum") == 0);
  CHECK(w.read("a.ckpt") == w.read("b.ckpt"));
  CHECK(w.read("a.log") == w.read("b.log"));

  auto after = w.files();
  for (const auto& f : before) after.erase(f);
  CHECK(after == std::set<std::string>{"a.ckpt", "a.log", "a.sum", "b.ckpt", "b.log", "b.sum", "cli.out", "cli.err"});

  const auto loaded = transfer::load_checkpoint(w.dir / "a.ckpt");
  transfer::save_checkpoint(w.dir / "c.ckpt", loaded, read_checkpoint(w.dir / "a.ckpt").run);
  CHECK(w.read("a.ckpt") == w.read("c.ckpt"));

  REQUIRE(w.run("train-source --train five.conll --dev five.conll --config small.cfg --seed 7 --out d.ckpt") == 0);
  CHECK(w.read("a.ckpt") != w.read("d.ckpt"));
  CHECK(read_checkpoint(w.dir / "d.ckpt").run.at("seed") == 7);
}

TEST_CASE("flags override the config file") {
  Workspace w("override");
  REQUIRE(w.run("train-source --train five.conll --dev five.conll --config small.cfg --max-epochs 1 "
                "--set lstm_hidden=6 --out m.ckpt") == 0);
  const auto run = read_checkpoint(w.dir / "m.ckpt").run;
  CHECK(run.at("config").at("max_epochs") == "1");
  CHECK(run.at("config").at("lstm_hidden") == "6");
  CHECK(transfer::load_checkpoint(w.dir / "m.ckpt").arch.lstm_hidden == 6);
}

TEST_CASE("train-target with lambda 0 equals training without a prior") {
  Workspace w("target");
  REQUIRE(w.run("train-source --train five.conll --dev five.conll --config small.cfg --out src.ckpt") == 0);
  REQUIRE(w.run("train-target --train five.conll --dev five.conll --config small.cfg --prior src.ckpt --lambda 0 "
                "--out with.ckpt") == 0);
  REQUIRE(w.run("train-target --train five.conll --dev five.conll --config small.cfg --out without.ckpt") == 0);
  CHECK(transfer::load_checkpoint(w.dir / "with.ckpt")
            .tensors.bitwise_equal(transfer::load_checkpoint(w.dir / "without.ckpt").tensors));

  REQUIRE(w.run("train-target --train five.conll --dev five.conll --config small.cfg --prior src.ckpt --lambda 0.01 "
                "--out reg.ckpt") == 0);
  CHECK(read_checkpoint(w.dir / "reg.ckpt").run.at("lambda") == 0.01);
}

TEST_CASE("prior with a different architecture is rejected") {
  Workspace w("mismatch");
  REQUIRE(w.run("train-source --train five.conll --dev five.conll --config small.cfg --out src.ckpt") == 0);
  CHECK(w.run("train-target --train five.conll --dev five.conll --config small.cfg --set lstm_hidden=5 "
              "--prior src.ckpt --lambda 0.1 --out t.ckpt") == 2);
  CHECK(w.read("cli.err").find("lstm") != std::string::npos);
}

TEST_CASE("tag then evaluate reproduces the trainer's dev accuracy") {
  Workspace w("pipeline");
  REQUIRE(w.run("train-source --train five.conll --dev five.conll --config small.cfg --out m.ckpt --summary m.sum") ==
          0);
  REQUIRE(w.run("tag --model m.ckpt --input five.conll --output pred.conll") == 0);
  REQUIRE(w.run("evaluate --gold five.conll --pred pred.conll --report r.txt --per-tag-csv t.csv") == 0);
  const auto report = w.read("r.txt");
  const auto at = report.find("accuracy:");
  REQUIRE(at != std::string::npos);
  const auto line = report.substr(at, report.find('\n', at) - at);
  const auto reported = line.substr(line.find_last_of(' ') + 1);
  CHECK(reported == value_of(w.read("m.sum"), "best_dev_accuracy"));
  CHECK(w.read("t.csv").rfind("tag,gold_count,errors,error_rate\n", 0) == 0);
}

TEST_CASE("evaluating a file against itself gives accuracy 1, comparing it with itself p = 1") {
  Workspace w("identity");
  REQUIRE(w.run("evaluate --gold five.conll --pred five.conll --report r.txt") == 0);
  CHECK(w.read("r.txt").find("accuracy: 1\n") != std::string::npos);
  REQUIRE(w.run("compare --gold five.conll --a five.conll --b five.conll --output c.txt") == 0);
  CHECK(value_of(w.read("c.txt"), "p_value") == "1");
  REQUIRE(w.run("compare --gold five.conll --a five.conll --b five.conll") == 0);
  CHECK(w.read("cli.out") == w.read("c.txt"));
}

TEST_CASE("crf training and tagging through the CLI") {
  Workspace w("crf");
  REQUIRE(w.run("train-crf --train five.conll --out m.crf") == 0);
  REQUIRE(w.run("tag --model m.crf --input five.conll --output p.conll") == 0);
  REQUIRE(w.run("evaluate --gold five.conll --pred p.conll --report r.txt") == 0);
  CHECK(w.read("r.txt").find("accuracy: 1\n") != std::string::npos);
  REQUIRE(w.run("train-crf --train five.conll --out again.crf") == 0);
  CHECK(w.read("m.crf") == w.read("again.crf"));
}

TEST_CASE("joint training and the lambda sweep are deterministic") {
  Workspace w("sweep");
  write_file(w.dir / "other.conll", "Haus\tNN\n#tag\tHASHTAG\n");
  REQUIRE(w.run("train-joint --source five.conll --target other.conll --dev five.conll --config small.cfg "
                "--out j.ckpt") == 0);
  CHECK(transfer::load_checkpoint(w.dir / "j.ckpt").alphabets.tags.find("HASHTAG").has_value());
  REQUIRE(w.run("train-source --train five.conll --dev five.conll --config small.cfg --out src.ckpt") == 0);
  const std::string sweep = "sweep-lambda --train five.conll --dev five.conll --test five.conll --prior src.ckpt "
                            "--config small.cfg --lambdas 0,0.01,1 --out ";
  REQUIRE(w.run(sweep + "a.csv") == 0);
  REQUIRE(w.run(sweep + "b.csv") == 0);
  CHECK(w.read("a.csv") == w.read("b.csv"));
  const auto csv = w.read("a.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  CHECK(w.run(sweep + "c.csv --lambdas 0.1,0.01") == 2);
  CHECK(w.run(sweep + "c.csv --lambdas 0,x") == 2);
}

TEST_CASE("make-fixture writes the five corpora reproducibly") {
  Workspace w("fixture");
  fs::create_directories(w.dir / "a");
  fs::create_directories(w.dir / "b");
  REQUIRE(w.run("make-fixture --seed 3 --out-dir a") == 0);
  REQUIRE(w.run("make-fixture --seed 3 --out-dir b") == 0);
  for (const char* f : {"source_train.conll", "source_dev.conll", "target_train.conll", "target_dev.conll",
                        "target_test.conll"}) {
    CHECK(read_file(w.dir / "a" / f) == read_file(w.dir / "b" / f));
  }
  CHECK(w.run("make-fixture --out-dir missing") == 2);
}
