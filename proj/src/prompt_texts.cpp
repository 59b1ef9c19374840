// Prompt template texts. Placeholders use {name} syntax and are substituted
// verbatim by the render functions; everything else is emitted unchanged.

#include "longeval/prompts.hpp"

namespace longeval::prompts {

const char* const kQuestionGen = R"tmpl({context_text}


I require {num_questions} thought-provoking questions designed to assess a comprehensive understanding of a fictional text. These questions should be crafted in a way that encourages indirect references to characters, settings, and key events, focusing on their roles rather than their explicit names. The aim is to test the reader's ability to identify and interpret these elements through their contextual importance in the narrative.

Each question should:

1. Use indirect references to characters but they should still uniquely identifiable.
2. Address the impact of specific events or decisions on the story's progression, without directly naming these events.
3. Explore themes and motifs through their representation in the narrative, rather than explicitly stating them (e.g., 'how the concept of betrayal is portrayed through the actions of key characters').
4. Analyze the narrative structure, such as the effect of the story's timeline on its unfolding, without directly citing chapter numbers or specific plot points.
5. Require drawing inferences or understanding symbolism and imagery, focusing on their effects rather than their direct descriptions.
6. Focus on your question on '{entity}' without naming it directly, please paraphrase it in still uniquely identifiable way.
7. Questions should be meticulously designed to challenge even the most attentive readers, requiring not just a superficial recall of the text but a deep and nuanced understanding of its themes, intricacies, and subtleties.
8. Format the output in the form of 'Question: <the question>' and in the next line 'Answer: <the answer>'.

Please list each question along with an answer that demonstrates deep and contextual understanding of the text and the entities who you are referring too. Go:)tmpl";

const char* const kAnswerNoContextLong = R"tmpl(The following is an Question on the book {title_and_author}.

Please provide a concise and accurate answer to the question. Your answer should be no longer than 5 sentences, but it can be shorter if the question can be fully addressed in fewer sentences. Aim for brevity and relevance in your response.
Question: {question}

Answer:)tmpl";

const char* const kAnswerFullContextLong = R"tmpl(The book as context for the question:

{context}

Given the context of the book provided above, please provide a concise and accurate answer to the question. Your answer should be no longer than 5 sentences, but it should be shorter if the question can be fully addressed in fewer sentences. Aim for brevity and relevance in your response. Answer in full sentences, not a list.
Question: {question}

Answer:)tmpl";

const char* const kAnswerRetrievedLong = R"tmpl(Context for the question:

{context}

Given the passages of the book provided above, please provide a concise and accurate answer to the question. Your answer should be no longer than 5 sentences, but it should be shorter if the question can be fully addressed in fewer sentences. Aim for brevity and relevance in your response. Answer in full sentences, not a list.
Question: {question}

Answer:)tmpl";

const char* const kEntailmentAbsolute = R"tmpl(Given the context from the text (e.g., book) provided:

{context}


Evaluate if the answer to the question below is supported by the context. Your judgment should specify whether the answer is correct: 'yes' or 'no',
indicating if the answer is directly supported by the text. Also, extract literal passages from the context as evidence to support your judgment.

Format the result as JSON:
{
'answer_is_entailed_by_context': 'yes or no',
'evidence': [
  'extracted passage(s)',
  ...
]
}

Question: "{question}"

Answer: "{answer}"

Is this answer correct according to the context? Provide your judgment (yes or no) and the necessary evidence:
{'answer_is_entailed_by_context':)tmpl";

const char* const kSideBySideBook = R"tmpl(Book as context for the following evaluation.
# CONTEXT

{context}

# CONTEXT END

# TASK

You will conduct a side-by-side evaluation. You will receive two answers for each question.

## Evaluation criteria

*Accuracy*: The primary consideration is that a system should provide only correct statements based on the above context, which need to be factually correct (not hallucinated).
If one system provides correct statements and the other does not, the system with correct statements is considered better. If both systems A and B provide statements that are not correct,
then the rating is 'None' when one or more statements in A and B are incorrect according to the context.

To evaluate the systems side by side, rank the system that fulfills the following criteria better:

*Relevance*: Do the answers directly address the questions without providing unnecessary information?
*Detail*: Are the answers detailed enough to provide a full understanding of the topic?
*Clarity*: How clear and understandable are the answers?

## Evaluation

Question: "{question}"

## System outputs:

Answer A: "{system_answer_A}"


Answer B: "{system_answer_B}"


## System rating

Please rate the systems either with 'A is better', 'B is better' or 'None'. Provide explanations and evidence for your rating. Support your explanations and evidence with excerpts from the context.

Format the result as JSON:
{
'system is better': 'A is better|B is better|None',
'evidence': [
  'explanations and evidence supporting the rating with excerpts from the context',
  ...
]
})tmpl";

const char* const kAnswerNoContextShort = R"tmpl(Here is a question related to the {movie/book} {title}.

Question: {q}

Please provide a short answer to the question in at most one sentence.

Answer:)tmpl";

const char* const kAnswerRetrievedShort = R"tmpl(Here are certain passages that are from either a movie script or a book.

{context}

Based on the above context here is a question.

Question: {q}

Please provide a short answer to the question in at most one sentence.

Answer:)tmpl";

const char* const kAnswerFullContextShort = R"tmpl(Here is a piece of text that is either a movie script or a book.

{text}

Based on the above text here is a question.

Question: {q}

Please provide a short answer to the question in at most one sentence.

Answer:)tmpl";

const char* const kGroundTruthAbsolute = R"tmpl(Here is a question.

Question: {q}

Here are two answers to the question.

Answer 1: {a1}

Answer 2: {a2}

Answer 1 is the ground truth answer and Answer 2 is the proposed answer as
suggested by a student. Given that Answer 1 is the truth, judge whether Answer 2 is correct.
Answer 2 should be *very* similar to Answer 1, but may differ slightly in how it is worded.
However, Answer 2 should not directly contradict any facts or information from Answer 1.

Is Answer 2 correct? Respond with only yes or no.)tmpl";

const char* const kGroundTruthSideBySide = R"tmpl(# TASK

You will conduct a side-by-side evaluation. You will receive two cadidate answers for each question.
You will also receive a groud truth answer for the question.

## Evaluation criteria

*Accuracy*: The primary consideration is that a system should provide only correct statements based on the ground truth answer.
If one system provides correct statements and the other does not, the system with correct statements is considered better. If both systems A and B provide statements that are not correct,
then the rating is 'None'. If both systems provide statements that are correct, then the rating is 'Equal'.

## Evaluation

Question: "{question}"

Ground truth answer: "{answer}"

## System outputs:

Answer A: "{system_answer_A}"


Answer B: "{system_answer_B}"


## System rating

Please rate the systems either with 'A is better', 'B is better' , 'None' or 'Equal'. Provide explanations and evidence for your rating.

Format the result as JSON:
{
'system is better': 'A is better|B is better|None|Equal',
'evidence': [
  'explanations and evidence supporting the rating',
  ...
]
}

Your evaluation:
{
'system is better':)tmpl";

const char* const kSideBySideScript = R"tmpl(Book or movie script as context for the following evaluation.
# CONTEXT

{context}

# CONTEXT END

# TASK

You will conduct a side-by-side evaluation. You will receive two candidate answers for each question.

## Evaluation criteria

*Accuracy*: The primary consideration is that a system should provide only correct statements based on the context above.
If one system provides correct statements and the other does not, the system with correct statements is considered better. If both systems A and B provide statements that are not correct,
then the rating is 'None'. If both systems provide statements that are correct, then the rating is 'Equal'.

## Evaluation

Question: "{question}"

## System outputs:

Answer A: "{system_answer_A}"


Answer B: "{system_answer_B}"


## System rating

Please rate the systems either with 'A is better', 'B is better' , 'None' or 'Equal'. Support your explanations and evidence with excerpts from the context.

Format the result as JSON:
{
'system is better': 'A is better|B is better|None|Equal',
'evidence': [
  'explanations and evidence supporting the rating',
  ...
]
}

Your evaluation:
{
'system is better':)tmpl";

}  // namespace longeval::prompts
