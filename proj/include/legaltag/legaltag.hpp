#pragma once

#include "legaltag/aspects.hpp"
#include "legaltag/concept_tree.hpp"
#include "legaltag/embeddings.hpp"
#include "legaltag/error.hpp"
#include "legaltag/parse_model.hpp"
#include "legaltag/pipeline.hpp"
#include "legaltag/recommender.hpp"
#include "legaltag/simplifier.hpp"
#include "legaltag/tagger.hpp"
