// SPDX-License-Identifier: Apache-2.0
#include <array>
#include <string>
#include <vector>

#include "simcse/data.hpp"
#include "simcse/error.hpp"

namespace simcse {

namespace {

using Words = std::vector<std::string>;

const std::string& choose(const Words& words, Rng& rng) { return words[static_cast<std::size_t>(rng.below(words.size()))]; }

// Index into `words` different from `avoid`.
std::size_t other_index(std::size_t size, std::size_t avoid, Rng& rng) {
    auto j = static_cast<std::size_t>(rng.below(size - 1));
    return j >= avoid ? j + 1 : j;
}

// ---- classification: one sentiment-word family per class ----

const std::array<Words, 5> kSentiment = {{
    {"awful", "dreadful", "horrible", "terrible", "atrocious"},
    {"bad", "dull", "weak", "boring", "poor"},
    {"okay", "average", "fine", "plain", "ordinary"},
    {"good", "nice", "solid", "pleasant", "enjoyable"},
    {"brilliant", "superb", "wonderful", "amazing", "outstanding"},
}};
const Words kReviewNouns = {"movie", "film", "story", "plot", "acting", "script", "cast", "ending"};

std::vector<Example> synth_classification(std::size_t size, Rng& rng) {
    std::vector<Example> out;
    for (std::size_t i = 0; i < size; ++i) {
        const int label = static_cast<int>(i % 5);
        const auto& fam = kSentiment[static_cast<std::size_t>(label)];
        const auto& noun = choose(kReviewNouns, rng);
        std::string text;
        switch (rng.below(3)) {
            case 0: text = "the " + noun + " was " + choose(fam, rng); break;
            case 1: text = "a " + choose(fam, rng) + " " + noun + " overall"; break;
            default: text = "i found the " + noun + " " + choose(fam, rng) + " and " + choose(fam, rng); break;
        }
        out.emplace_back(Classification{std::move(text), label});
    }
    return out;
}

// ---- pair_labeled: duplicates are synonym rewrites of the same statement ----

const Words kActors = {"the chef", "my neighbor", "the teacher", "a pilot", "the doctor", "our coach", "the artist",
                       "a farmer"};
const std::vector<std::pair<std::string, std::string>> kVerbSynonyms = {
    {"bought", "purchased"}, {"fixed", "repaired"}, {"painted", "colored"}, {"sold", "traded"},
    {"cleaned", "washed"},   {"found", "discovered"}, {"built", "constructed"}, {"broke", "damaged"}};
const std::vector<std::pair<std::string, std::string>> kObjectSynonyms = {
    {"car", "automobile"}, {"house", "home"}, {"boat", "ship"}, {"bike", "bicycle"},
    {"shop", "store"},     {"road", "street"}, {"gift", "present"}, {"jacket", "coat"}};

std::vector<Example> synth_pair_labeled(std::size_t size, Rng& rng) {
    std::vector<Example> out;
    for (std::size_t i = 0; i < size; ++i) {
        const auto actor = static_cast<std::size_t>(rng.below(kActors.size()));
        const auto verb = static_cast<std::size_t>(rng.below(kVerbSynonyms.size()));
        const auto obj = static_cast<std::size_t>(rng.below(kObjectSynonyms.size()));
        const std::string a = kActors[actor] + " " + kVerbSynonyms[verb].first + " the " + kObjectSynonyms[obj].first;
        const bool duplicate = i % 2 == 0;
        std::string b;
        if (duplicate) {
            const bool swap_verb = rng.below(2) == 0;
            b = kActors[actor] + " " + (swap_verb ? kVerbSynonyms[verb].second : kVerbSynonyms[verb].first) +
                " the " + (swap_verb ? kObjectSynonyms[obj].first : kObjectSynonyms[obj].second);
        } else {
            const auto actor2 = other_index(kActors.size(), actor, rng);
            const auto verb2 = other_index(kVerbSynonyms.size(), verb, rng);
            const auto obj2 = other_index(kObjectSynonyms.size(), obj, rng);
            b = kActors[actor2] + " " + kVerbSynonyms[verb2].first + " the " + kObjectSynonyms[obj2].first;
        }
        out.emplace_back(PairLabeled{a, std::move(b), duplicate ? 1 : 0});
    }
    return out;
}

// ---- pair_scored: five slots, score = number of slots whose words agree ----

const std::array<Words, 5> kSlots = {{
    {"man", "woman", "child", "dog", "cat", "bird"},
    {"runs", "jumps", "sleeps", "eats", "sings", "reads"},
    {"quickly", "slowly", "quietly", "loudly", "happily", "sadly"},
    {"park", "house", "garden", "street", "beach", "forest"},
    {"morning", "evening", "night", "noon", "weekend", "holiday"},
}};

std::string slot_sentence(const std::array<std::size_t, 5>& w) {
    return "the " + kSlots[0][w[0]] + " " + kSlots[1][w[1]] + " " + kSlots[2][w[2]] + " in the " + kSlots[3][w[3]] +
           " at " + kSlots[4][w[4]];
}

std::vector<Example> synth_pair_scored(std::size_t size, Rng& rng) {
    std::vector<Example> out;
    for (std::size_t i = 0; i < size; ++i) {
        std::array<std::size_t, 5> a{}, b{};
        for (std::size_t s = 0; s < 5; ++s) a[s] = static_cast<std::size_t>(rng.below(kSlots[s].size()));
        const auto shared = static_cast<std::size_t>(i % 6);
        // Random subset of `shared` slots keeps a's word; the rest differ.
        const auto order = shuffled_indices(5, rng);
        for (std::size_t k = 0; k < 5; ++k) {
            const std::size_t s = order[k];
            b[s] = k < shared ? a[s] : other_index(kSlots[s].size(), a[s], rng);
        }
        out.emplace_back(PairScored{slot_sentence(a), slot_sentence(b), static_cast<double>(shared)});
    }
    return out;
}

// ---- triplet: entailment via synonym, contradiction via negated other subject ----

const Words kSubjects = {"the boy", "the girl", "an old man", "a young woman", "the musician", "the student",
                         "the police officer", "a tourist"};
const std::vector<std::pair<std::string, std::string>> kTripletVerbs = {
    {"holds", "hold"}, {"carries", "carry"}, {"watches", "watch"}, {"opens", "open"},
    {"drops", "drop"}, {"throws", "throw"}, {"grabs", "grab"},     {"pushes", "push"}};
const std::vector<std::string> kTripletVerbSynonyms = {"grips", "totes", "observes", "unlocks",
                                                       "releases", "tosses", "seizes", "shoves"};
const Words kTripletObjects = {"a ball", "a guitar", "a book", "a door", "a bag", "a camera", "a cup", "a box"};

std::vector<Example> synth_triplets(std::size_t size, Rng& rng) {
    std::vector<Example> out;
    for (std::size_t i = 0; i < size; ++i) {
        const auto subj = static_cast<std::size_t>(rng.below(kSubjects.size()));
        const auto verb = static_cast<std::size_t>(rng.below(kTripletVerbs.size()));
        const auto obj = static_cast<std::size_t>(rng.below(kTripletObjects.size()));
        const auto subj2 = other_index(kSubjects.size(), subj, rng);
        const auto verb2 = static_cast<std::size_t>(rng.below(kTripletVerbs.size()));
        const auto obj2 = other_index(kTripletObjects.size(), obj, rng);
        std::string anchor = kSubjects[subj] + " " + kTripletVerbs[verb].first + " " + kTripletObjects[obj];
        std::string positive = kSubjects[subj] + " " + kTripletVerbSynonyms[verb] + " " + kTripletObjects[obj];
        std::string negative = kSubjects[subj2] + " does not " + kTripletVerbs[verb2].second + " " + kTripletObjects[obj2];
        out.emplace_back(Triplet{std::move(anchor), std::move(positive), std::move(negative)});
    }
    return out;
}

}  // namespace

std::vector<Example> synth_toy_corpus(Schema kind, std::size_t size, Rng& rng) {
    if (size == 0) throw ConfigError("synthetic corpus size must be at least 1");
    switch (kind) {
        case Schema::classification: return synth_classification(size, rng);
        case Schema::pair_labeled: return synth_pair_labeled(size, rng);
        case Schema::pair_scored: return synth_pair_scored(size, rng);
        case Schema::triplet: return synth_triplets(size, rng);
    }
    return {};
}

}  // namespace simcse
