"""Fixed lexical resources for the preprocessing pipeline.

Bump ``RESOURCES_VERSION`` whenever any table changes; it is recorded in run
configs so cleaned corpora can be traced to the tables that produced them.
Emoji names come from the interpreter's Unicode database
(``unicodedata.unidata_version``).
"""

RESOURCES_VERSION = "1"

STOPWORDS = frozenset(
    """
    a about above after again against all am an and any are as at be because been
    before being below between both but by can could did do does doing down during
    each few for from further had has have having he her here hers herself him
    himself his how i if in into is it its itself just me more most my myself no
    nor not of off on once only or other our ours ourselves out over own same she
    should so some such than that the their theirs them themselves then there these
    they this those through to too under until up very was we were what when where
    which while who whom why will with would you your yours yourself yourselves
    """.split()
)

# Keys are lowercase with a straight apostrophe; matching is case-insensitive
# and curly apostrophes are normalised first.
CONTRACTIONS = {
    "ain't": "is not",
    "aren't": "are not",
    "can't": "cannot",
    "could've": "could have",
    "couldn't": "could not",
    "didn't": "did not",
    "doesn't": "does not",
    "don't": "do not",
    "hadn't": "had not",
    "hasn't": "has not",
    "haven't": "have not",
    "he'd": "he would",
    "he'll": "he will",
    "he's": "he is",
    "how's": "how is",
    "i'd": "i would",
    "i'll": "i will",
    "i'm": "i am",
    "i've": "i have",
    "isn't": "is not",
    "it'd": "it would",
    "it'll": "it will",
    "it's": "it is",
    "let's": "let us",
    "might've": "might have",
    "mightn't": "might not",
    "must've": "must have",
    "mustn't": "must not",
    "shan't": "shall not",
    "she'd": "she would",
    "she'll": "she will",
    "she's": "she is",
    "should've": "should have",
    "shouldn't": "should not",
    "that's": "that is",
    "there's": "there is",
    "they'd": "they would",
    "they'll": "they will",
    "they're": "they are",
    "they've": "they have",
    "wasn't": "was not",
    "we'd": "we would",
    "we'll": "we will",
    "we're": "we are",
    "we've": "we have",
    "weren't": "were not",
    "what's": "what is",
    "where's": "where is",
    "who's": "who is",
    "won't": "will not",
    "would've": "would have",
    "wouldn't": "would not",
    "y'all": "you all",
    "you'd": "you would",
    "you'll": "you will",
    "you're": "you are",
    "you've": "you have",
}

# Greedy longest-prefix segmentation of lowercase hashtag bodies draws on
# this list; single letters are left out so residue is not shredded.
HASHTAG_WORDS = frozenset(
    """
    aapl amzn fb goog googl nflx tsla msft nvda spy qqq faang
    all alert alerts and bear bearish bears big bought bubble bull bullish bulls buy
    buying call calls cash chart crash crypto day dip down dump earnings fed forever
    gain gains go going gold good green hold holding hodl high long loss low market
    markets money moon new news next now option options play price profit pump put
    puts rally red rocket run sell selling short squeeze stock stocks the to today
    top trade trader trading up value week win
    """.split()
)
