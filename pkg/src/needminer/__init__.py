"""Need mining: turn raw micro-blog records into a trained binary
"contains a customer need" classifier.

The pipeline stages map one-to-one onto the submodules:

    corpus     parse, keyword-filter, and persist tweet records
    filtering  language / URL / duplicate reduction to a candidate set
    labeling   three-vote crowd labeling with a small HTTP service
    textproc   tokenize, stem, stop-word removal, Boolean vectorization
    sampling   stratified splits and class-imbalance balancing
    classify   Naive Bayes, Pegasos SVM, Random Tree, Random Forest
    evaluate   metrics, repeated-split protocol, leaderboard, recommendation
    cli        file-driven command-line front end
"""

__version__ = "0.1.0"
