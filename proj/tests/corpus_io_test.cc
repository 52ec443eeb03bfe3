// Copyright (c) 2026 The resunet-sv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <bit>
#include <cstring>
#include <limits>

#include "doctest.h"
#include "sv/corpus_io.h"
#include "test_util.h"

namespace sv {
namespace {

using testing::TempDir;
using testing::ThrownKind;

Manifest SmallManifest() {
  Manifest m;
  m.records.push_back({"a1", "spkA", "wav/a1.wav", 3.25, Domain::kSource, true});
  m.records.push_back({"b1", std::nullopt, "wav/b1.wav", 7.5, Domain::kTarget, false});
  m.records.push_back({"c1", "spkC", "/abs/c1.wav", 0.01, Domain::kTarget, true});
  return m;
}

std::string LittleEndian16(int v) {
  return {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
}
std::string LittleEndian32(std::uint32_t v) {
  std::string s;
  for (int i = 0; i < 4; ++i) s += static_cast<char>((v >> (8 * i)) & 0xff);
  return s;
}

// Hand-assembled RIFF file with the given format fields and samples.
std::string WavBytes(int format, int channels, int rate, int bits,
                     const std::vector<std::int16_t>& samples) {
  std::string data;
  for (auto s : samples) data += LittleEndian16(static_cast<std::uint16_t>(s));
  std::string fmt = LittleEndian16(format) + LittleEndian16(channels) +
                    LittleEndian32(rate) +
                    LittleEndian32(rate * channels * bits / 8) +
                    LittleEndian16(channels * bits / 8) + LittleEndian16(bits);
  std::string body = "WAVE";
  body += "fmt " + LittleEndian32(16) + fmt;
  body += "LIST" + LittleEndian32(3) + "abc" + std::string(1, '\0');
  body += "data" + LittleEndian32(data.size()) + data;
  return "RIFF" + LittleEndian32(body.size()) + body;
}

TEST_CASE("manifest round-trips and preserves absent speakers") {
  TempDir dir;
  const Manifest m = SmallManifest();
  WriteManifest(m, dir.File("m.tsv"));
  const Manifest back = ReadManifest(dir.File("m.tsv"));
  CHECK(back == m);
  CHECK_FALSE(back.records[1].speaker.has_value());
  const std::string text = testing::ReadFile(dir.File("m.tsv"));
  CHECK(text.rfind("id\tspeaker\tpath\tduration\tdomain\tlabeled\n", 0) == 0);
}

TEST_CASE("manifest errors") {
  TempDir dir;
  const std::string header = "id\tspeaker\tpath\tduration\tdomain\tlabeled\n";
  testing::WriteFile(dir.File("dup.tsv"),
                     header + "x\ts\tp\t1\tsource\t1\nx\ts\tp\t2\tsource\t1\n");
  CHECK(ThrownKind([&] { ReadManifest(dir.File("dup.tsv")); }) ==
        ErrorKind::kDuplicateId);
  testing::WriteFile(dir.File("bad.tsv"), header + "x\ts\tp\tlong\tsource\t1\n");
  CHECK(ThrownKind([&] { ReadManifest(dir.File("bad.tsv")); }) ==
        ErrorKind::kParse);
  testing::WriteFile(dir.File("nohdr.tsv"), "x\ts\tp\t1\tsource\t1\n");
  CHECK(ThrownKind([&] { ReadManifest(dir.File("nohdr.tsv")); }) ==
        ErrorKind::kParse);
  CHECK(ThrownKind([&] { ReadManifest(dir.File("missing.tsv")); }) ==
        ErrorKind::kIo);
  try {
    ReadManifest(dir.File("bad.tsv"));
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("bad.tsv:2") != std::string::npos);
  }
}

TEST_CASE("trial lists: labeled, unlabeled and mixed") {
  TempDir dir;
  testing::WriteFile(dir.File("l.txt"), "1 a b\n0 a c\n");
  const TrialList labeled = ReadTrials(dir.File("l.txt"));
  REQUIRE(labeled.size() == 2);
  CHECK(labeled.labeled());
  CHECK(TrialLabels(labeled) == std::vector<bool>{true, false});
  WriteTrials(labeled, dir.File("l2.txt"));
  CHECK(ReadTrials(dir.File("l2.txt")) == labeled);

  testing::WriteFile(dir.File("u.txt"), "a b\na c\n");
  const TrialList unlabeled = ReadTrials(dir.File("u.txt"));
  CHECK_FALSE(unlabeled.labeled());
  CHECK(ThrownKind([&] { TrialLabels(unlabeled); }) == ErrorKind::kParse);

  testing::WriteFile(dir.File("mixed.txt"), "1 a b\na c\n");
  CHECK(ThrownKind([&] { ReadTrials(dir.File("mixed.txt")); }) ==
        ErrorKind::kParse);
  testing::WriteFile(dir.File("badlabel.txt"), "2 a b\n");
  CHECK(ThrownKind([&] { ReadTrials(dir.File("badlabel.txt")); }) ==
        ErrorKind::kParse);
}

TEST_CASE("scores round-trip exactly") {
  TempDir dir;
  Rng rng(5);
  std::normal_distribution<double> g;
  ScoreSet s;
  for (int i = 0; i < 200; ++i) {
    s.entries.push_back({"e" + std::to_string(i), "t" + std::to_string(i),
                         g(rng) * std::pow(10.0, i % 7 - 3)});
  }
  s.entries.push_back({"x", "y", 0.1});
  WriteScores(s, dir.File("s.txt"));
  CHECK(ReadScores(dir.File("s.txt")) == s);
}

TEST_CASE("embedding set invariants") {
  EmbeddingSet set(3);
  const float v[3] = {1, 2, 3};
  set.Add("a", v);
  CHECK(ThrownKind([&] { set.Add("a", v); }) == ErrorKind::kDuplicateId);
  const float short_v[2] = {1, 2};
  CHECK(ThrownKind([&] { set.Add("b", short_v); }) == ErrorKind::kShape);
  const float nan_v[3] = {1, std::numeric_limits<float>::quiet_NaN(), 0};
  CHECK(ThrownKind([&] { set.Add("c", nan_v); }) == ErrorKind::kNorm);
  CHECK(ThrownKind([&] { set.at("zz"); }) == ErrorKind::kUnknownUtterance);
  CHECK(set.at("a")[2] == 3.0f);
  CHECK(set.Find("a") == 0u);
}

TEST_CASE("embedding files round-trip bit-exactly") {
  TempDir dir;
  Rng rng(11);
  std::uniform_int_distribution<std::uint32_t> bits;
  EmbeddingSet set(17);
  std::vector<float> row(17);
  for (int i = 0; i < 50; ++i) {
    for (auto& x : row) {
      // Arbitrary finite bit patterns, including subnormals and -0.
      float f;
      do {
        f = std::bit_cast<float>(bits(rng));
      } while (!std::isfinite(f));
      x = f;
    }
    if (i == 0) row[0] = -0.0f;
    set.Add("utt" + std::to_string(i) + (i % 3 ? "" : "-long-identifier"), row);
  }
  WriteEmbeddings(set, dir.File("e.emb"));
  const EmbeddingSet back = ReadEmbeddings(dir.File("e.emb"));
  CHECK(back == set);
  CHECK(std::memcmp(back.data().data(), set.data().data(),
                    set.data().size() * sizeof(float)) == 0);
  WriteEmbeddings(back, dir.File("e2.emb"));
  CHECK(testing::ReadFile(dir.File("e.emb")) ==
        testing::ReadFile(dir.File("e2.emb")));

  const std::string bytes = testing::ReadFile(dir.File("e.emb"));
  testing::WriteFile(dir.File("trunc.emb"), bytes.substr(0, bytes.size() - 3));
  CHECK(ThrownKind([&] { ReadEmbeddings(dir.File("trunc.emb")); }) ==
        ErrorKind::kCorruptFile);
  testing::WriteFile(dir.File("magic.emb"), "XXXX" + bytes.substr(4));
  CHECK(ThrownKind([&] { ReadEmbeddings(dir.File("magic.emb")); }) ==
        ErrorKind::kFormat);
  testing::WriteFile(dir.File("extra.emb"), bytes + "z");
  CHECK(ThrownKind([&] { ReadEmbeddings(dir.File("extra.emb")); }) ==
        ErrorKind::kCorruptFile);
}

TEST_CASE("wav reading") {
  TempDir dir;
  const std::vector<std::int16_t> samples = {0, 1, -1, 32767, -32768, 1234};
  testing::WriteFile(dir.File("ok.wav"), WavBytes(1, 1, 16000, 16, samples));
  const Waveform w = ReadWav(dir.File("ok.wav"));
  REQUIRE(w.samples.size() == samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    CHECK(w.samples[i] == static_cast<float>(samples[i]) / 32768.0f);
  }
  WriteWav(w, dir.File("rt.wav"));
  CHECK(ReadWav(dir.File("rt.wav")).samples == w.samples);

  testing::WriteFile(dir.File("stereo.wav"), WavBytes(1, 2, 16000, 16, samples));
  CHECK(ThrownKind([&] { ReadWav(dir.File("stereo.wav")); }) ==
        ErrorKind::kUnsupportedFormat);
  testing::WriteFile(dir.File("8k.wav"), WavBytes(1, 1, 8000, 16, samples));
  CHECK(ThrownKind([&] { ReadWav(dir.File("8k.wav")); }) ==
        ErrorKind::kUnsupportedFormat);
  testing::WriteFile(dir.File("float.wav"), WavBytes(3, 1, 16000, 16, samples));
  CHECK(ThrownKind([&] { ReadWav(dir.File("float.wav")); }) ==
        ErrorKind::kUnsupportedFormat);
  const std::string bytes = WavBytes(1, 1, 16000, 16, samples);
  testing::WriteFile(dir.File("trunc.wav"), bytes.substr(0, 30));
  CHECK(ThrownKind([&] { ReadWav(dir.File("trunc.wav")); }) ==
        ErrorKind::kParse);
  CHECK(ThrownKind([&] { ReadWav(dir.File("none.wav")); }) == ErrorKind::kIo);
}

TEST_CASE("wav writing clips and quantizes") {
  TempDir dir;
  Waveform w;
  w.samples = {2.0f, -2.0f, 0.5f, 1.0f / 65536.0f * 3.0f};
  WriteWav(w, dir.File("c.wav"));
  const Waveform back = ReadWav(dir.File("c.wav"));
  CHECK(back.samples[0] == 32767.0f / 32768.0f);
  CHECK(back.samples[1] == -1.0f);
  CHECK(back.samples[2] == 0.5f);
  CHECK(back.samples[3] == 2.0f / 32768.0f);  // round(1.5) = 2
}

TEST_CASE("durations map") {
  const DurationMap d = Durations(SmallManifest());
  CHECK(d.at("a1") == 3.25);
  CHECK(d.size() == 3);
}

}  // namespace
}  // namespace sv
