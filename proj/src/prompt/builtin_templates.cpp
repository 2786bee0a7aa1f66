#include "pbp/prompt.hpp"

namespace pbp {

namespace {

struct FamilyText {
    const char* family;
    const char* generation;
    const char* classification;
    const char* ranking;
    const char* consolidation;
    const char* vanilla;
    const char* cot;
    const char* stepback_q;
    const char* fewshot;
};

// Bodies are byte-stable: cache keys and run ids hash the rendered prompts.
// Wording quirks, such as the swapped subjects in the consolidation bodies, are intentional.
constexpr FamilyText kFamilies[] = {
    {
        "irony",
        R"(You are given the task to extract principles or important features which distinguish between statements that contain irony and those that do not.
Here are some examples:
{demos}
Can you analyze each statement and identify whether it contains irony or not?
Based on your analysis, can you extract principles or important features which distinguish between statements that contain irony and those that do not?)",
        R"(You are given the task to identify the sentiment of the following statement.
Here are important features to distinguish statements that contain irony and those that do not.
{principle}
Statement: {input}
Does the statement contain irony? Answer with one of the following options: {label_words}.
Answer:)",
        R"(You are given the task to rank a list of principles based on how helpful they are for identifying whether statements contain irony or not.
Here is the list of principles:
{candidates}
{#demos}Here are some examples of statements:
{demos}
{/demos}How would you rank the principles above based on helpfulness for identifying whether statements contain irony or not?
Provide your ranking of top 10 principles in the following format: A > B > C...)",
        R"(You are given multiple sets of principles for distinguishing emotions in statements. Your task is to analyze these principles and consolidate them into a single, comprehensive set of principles.
Here are the sets of principles:
{candidates}
Please analyze these principles and create a consolidated set that captures the most important and effective principles for identifying emotions in statements. Ensure the consolidated set is clear, non-redundant, and comprehensive.)",
        R"(You are given the task to identify whether the following statement contains irony or not.
Statement: {input}
Answer with one of the following options: {label_words}.
Answer:)",
        R"(You are given the task to identify whether the following statement contains irony or not.
Statement: {input}
Answer with one of the following options: {label_words}.
Let's think step by step
Answer:)",
        R"(You are given the task to identify whether the following statement contains irony or not.
Statement: {input}
What are the principles or important features to distinguish statements that contain irony and those that do not?)",
        R"(You are given the task to identify whether the following statement contains irony or not.
Here are some examples:
{demos}
Statement: {input}
Answer with one of the following options: {label_words}.
Answer:)",
    },
    {
        "emotion4",
        R"(You are given the task to extract principles or important features which distinguish statements that express four different emotions: anger, joy, optimism, and sadness.
Here are some examples that express different emotions:
{demos}
Can you analyze each statement and identify the emotion that it tries to express from these four options: anger, joy, optimism, and sadness?
Based on your analysis, can you extract principles or important features which distinguish between statements that express these four emotions: anger, joy, optimism, and sadness?)",
        R"(You are given the task to identify the emotion of the following statements from four options: anger, joy, optimism, and sadness.
Here are some principles that distinguish statements expressing different emotions:
{principle}
Statement: {input}
Which emotion does the statement express? Answer with one of the following options: {label_words}.
Answer:)",
        R"(You are given the task to rank a list of principles based on how helpful they are for identifying the emotions of statements from four options: anger, joy, optimism, and sadness.
Here is the list of principles:
{candidates}
{#demos}Here are some examples of statements:
{demos}
{/demos}How would you rank the principles above based on helpfulness for identifying emotions of statements?
Provide your ranking of top 5 principles in the following format: A > B > C...)",
        R"(You are given a list of principles written by different LLM agents to distinguish statements that express four different emotions: anger, joy, optimism, and sadness.
Here are the sets of principles:
{candidates}
Please analyze these principles and create a consolidated set that captures the most important and effective principles for identifying irony in statements. Ensure the consolidated set is clear, non-redundant, and comprehensive.)",
        R"(You are given the task to identify the emotion of the following statement from four options: anger, joy, optimism, and sadness.
Statement: {input}
Answer with one of the following options: {label_words}.
Answer:)",
        R"(You are given the task to identify the emotion of the following statement from four options: anger, joy, optimism, and sadness.
Statement: {input}
Answer with one of the following options: {label_words}.
Let's think step by step
Answer:)",
        R"(You are given the task to identify the emotion of the following statement from four options: anger, joy, optimism, and sadness.
Statement: {input}
What are the principles or important features to distinguish statements that express four different emotions: anger, joy, optimism, and sadness?)",
        R"(You are given the task to identify the emotion of the following statement from four options: anger, joy, optimism, and sadness.
Here are some examples:
{demos}
Statement: {input}
Answer with one of the following options: {label_words}.
Answer:)",
    },
    {
        "financial3",
        R"(You are given the task to extract principles or important features which distinguish between financial news that have positive, neutral, or negative sentiments.
Here are some examples:
{demos}
Can you analyze each financial news below and identify the sentiment from these three options?
Based on your analysis, can you extract principles or important features which distinguish between statements that have positive, neutral, or negative sentiments?)",
        R"(You are given the task to identify the sentiment of the following financial news.
Here are some key principles that distinguish statements with positive, neutral, and negative sentiments.
{principle}
Statement: {input}
What is the sentiment of the financial news? Answer with one of the following options: {label_words}.
Answer:)",
        R"(You are given the task to rank a list of principles based on how helpful they are for identifying sentiments of financial news from three options: positive, negative, or neutral.
Here is the list of principles:
{candidates}
{#demos}Here are some examples of statements:
{demos}
{/demos}How would you rank the principles above based on helpfulness for identifying sentiments of financial news?
Provide your ranking of top 10 principles in the following format: A > B > C...)",
        R"(You are given a list of principles written by different LLM agents to distinguish financial news with positive, neutral or negative sentiments.
Here are the sets of principles:
{candidates}
Please analyze these principles and create a consolidated set that captures the most important and effective principles for identifying different sentiments in financial news. Ensure the consolidated set is clear, non-redundant, and comprehensive.)",
        R"(You are given the task to identify the sentiment of the following financial news from three options: positive, negative, or neutral.
Statement: {input}
Answer with one of the following options: {label_words}.
Answer:)",
        R"(You are given the task to identify the sentiment of the following financial news from three options: positive, negative, or neutral.
Statement: {input}
Answer with one of the following options: {label_words}.
Let's think step by step
Answer:)",
        R"(You are given the task to identify the sentiment of the following financial news from three options: positive, negative, or neutral.
Statement: {input}
What are the principles or important features to distinguish financial news with positive, neutral, or negative sentiments?)",
        R"(You are given the task to identify the sentiment of the following financial news from three options: positive, negative, or neutral.
Here are some examples:
{demos}
Statement: {input}
Answer with one of the following options: {label_words}.
Answer:)",
    },
    {
        "binary-product",
        R"(You are given the task to extract principles or important features which distinguish between products that are classified as A and those that are not.
Here are some examples and their corresponding answers.
{demos}
Can you analyze each product description below and identify whether it is classified as A or not?
Based on your analysis, can you extract principles or important features which distinguish between products that are classified as A and those that are not?)",
        R"(You are given the task to identify whether the product below is classified as A or not based on the product description.
Here are some key principles that distinguish products that are classified as A and those that are not.
{principle}
Statement: {input}
Is the product classified as A? Answer with one of the following options: {label_words}.
Answer:)",
        R"(You are given the task to rank a list of principles based on how helpful they are for identifying whether products below are classified as A or not based on product descriptions.
Here is the list of principles:
{candidates}
{#demos}Here are some examples of statements:
{demos}
{/demos}How would you rank the principles above based on helpfulness for identifying products as A or not?
Provide your ranking of top 5 principles in the following format: A > B > C...)",
        R"(You are given a list of principles written by different LLM agents to distinguish products that are classified as A or not.
Here are the sets of principles:
{candidates}
Please analyze these principles and create a consolidated set that captures the most important and effective principles for identifying products classified as A or not. Ensure the consolidated set is clear, non-redundant, and comprehensive.)",
        R"(You are given the task to identify whether the product below is classified as A or not based on the product description.
Statement: {input}
Answer with one of the following options: {label_words}.
Answer:)",
        R"(You are given the task to identify whether the product below is classified as A or not based on the product description.
Statement: {input}
Answer with one of the following options: {label_words}.
Let's think step by step
Answer:)",
        R"(You are given the task to identify whether the product below is classified as A or not based on the product description.
Statement: {input}
What are the principles or important features to distinguish products that are classified as A and those that are not?)",
        R"(You are given the task to identify whether the product below is classified as A or not based on the product description.
Here are some examples:
{demos}
Statement: {input}
Answer with one of the following options: {label_words}.
Answer:)",
    },
};

}  // namespace

TemplateRegistry TemplateRegistry::with_builtins() {
    TemplateRegistry reg;
    for (const auto& f : kFamilies) {
        reg.add({f.family, TemplateKind::generation, f.generation});
        reg.add({f.family, TemplateKind::classification, f.classification});
        reg.add({f.family, TemplateKind::ranking, f.ranking});
        reg.add({f.family, TemplateKind::consolidation, f.consolidation});
        reg.add({f.family, TemplateKind::vanilla, f.vanilla});
        reg.add({f.family, TemplateKind::cot, f.cot});
        reg.add({f.family, TemplateKind::stepback_q, f.stepback_q});
        // The second stepback call reuses the classification prompt; the
        // first call's answer takes the {principle} slot.
        reg.add({f.family, TemplateKind::stepback_a, f.classification});
        reg.add({f.family, TemplateKind::fewshot, f.fewshot});
    }
    return reg;
}

}  // namespace pbp
