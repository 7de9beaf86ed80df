#include "sdml/lexicons.hpp"

#include <fstream>
#include <sstream>

#include "sdml/errors.hpp"
#include "sdml/unicode.hpp"

namespace sdml {

namespace {

// Words triggering boundary suppression when followed by a single period.
constexpr const char* kAbbreviations =
    "mr mrs ms dr prof st vs etc e.g i.e fig no";

// Fallback-tagger closed classes, `word TAG` per line. First entry wins if a
// word were repeated. The tagger is crude on purpose; accuracy here is not
// contractual.
constexpr const char* kClosedClass = R"(
the DET
a DET
an DET
this DET
that DET
these DET
those DET
each DET
every DET
either DET
neither DET
some DET
any DET
no DET
all DET
both DET
half DET
such DET
another DET
which DET
whatever DET
whichever DET
i PRON
you PRON
he PRON
she PRON
it PRON
we PRON
they PRON
me PRON
him PRON
her PRON
us PRON
them PRON
myself PRON
yourself PRON
himself PRON
herself PRON
itself PRON
ourselves PRON
yourselves PRON
themselves PRON
mine PRON
yours PRON
hers PRON
ours PRON
theirs PRON
my PRON
your PRON
his PRON
its PRON
our PRON
their PRON
who PRON
whom PRON
whose PRON
what PRON
someone PRON
anyone PRON
everyone PRON
nobody PRON
somebody PRON
anybody PRON
everybody PRON
something PRON
anything PRON
everything PRON
nothing PRON
one PRON
of ADP
in ADP
on ADP
at ADP
by ADP
with ADP
from ADP
to ADP
for ADP
about ADP
against ADP
between ADP
into ADP
through ADP
during ADP
before ADP
after ADP
above ADP
below ADP
under ADP
over ADP
across ADP
behind ADP
beyond ADP
near ADP
off ADP
onto ADP
upon ADP
within ADP
without ADP
along ADP
among ADP
around ADP
despite ADP
except ADP
inside ADP
outside ADP
per ADP
since ADP
toward ADP
towards ADP
underneath ADP
until ADP
via ADP
beside ADP
besides ADP
amid ADP
and CCONJ
or CCONJ
but CCONJ
nor CCONJ
plus CCONJ
yet CCONJ
if SCONJ
because SCONJ
although SCONJ
though SCONJ
unless SCONJ
whereas SCONJ
whether SCONJ
while SCONJ
as SCONJ
lest SCONJ
am AUX
is AUX
are AUX
was AUX
were AUX
be AUX
been AUX
being AUX
do AUX
does AUX
did AUX
have AUX
has AUX
had AUX
having AUX
will AUX
would AUX
shall AUX
should AUX
can AUX
could AUX
may AUX
might AUX
must AUX
ought AUX
not PART
n't PART
oh INTJ
ah INTJ
wow INTJ
hey INTJ
hello INTJ
hi INTJ
yes INTJ
yeah INTJ
yep INTJ
hmm INTJ
uh INTJ
um INTJ
ouch INTJ
oops INTJ
alas INTJ
bravo INTJ
goodbye INTJ
bye INTJ
okay INTJ
ok INTJ
please INTJ
very ADV
too ADV
also ADV
just ADV
now ADV
then ADV
here ADV
there ADV
when ADV
where ADV
why ADV
how ADV
always ADV
never ADV
often ADV
sometimes ADV
usually ADV
rarely ADV
soon ADV
still ADV
already ADV
again ADV
quite ADV
rather ADV
almost ADV
enough ADV
even ADV
ever ADV
far ADV
well ADV
really ADV
perhaps ADV
maybe ADV
however ADV
therefore ADV
moreover ADV
furthermore ADV
nevertheless ADV
nonetheless ADV
meanwhile ADV
instead ADV
otherwise ADV
anyway ADV
indeed ADV
thus ADV
hence ADV
so ADV
today ADV
tomorrow ADV
yesterday ADV
more ADV
most ADV
less ADV
least ADV
only ADV
once ADV
twice ADV
together ADV
away ADV
back ADV
up ADV
down ADV
out ADV
)";

constexpr const char* kStopWords = R"(
a about above after again against all am an and any are as at be because been
before being below between both but by can did do does doing down during each
few for from further had has have having he her here hers herself him himself
his how i if in into is it its itself just me more most my myself no nor not
now of off on once only or other our ours ourselves out over own same she
should so some such than that the their theirs them themselves then there
these they this those through to too under until up very was we were what when
where which while who whom why will with you your yours yourself yourselves
n't 's is are was were been being am do does did have has had having
)";

// Single-token discourse connectives.
constexpr const char* kConnectives = R"(
however therefore moreover furthermore nevertheless nonetheless meanwhile
consequently additionally thus hence accordingly besides instead otherwise
similarly likewise conversely indeed finally also first firstly second
secondly third thirdly next then because although though while whereas but
and or so yet since unless until if when
)";

constexpr const char* kFirstPerson =
    "i we me us my our mine ours myself ourselves i'm i've i'll i'd we're we've we'll we'd";

constexpr const char* kDemonstratives = "this that these those";

constexpr const char* kFrequentWords =
#include "data/frequent_words.inc"
    ;

std::unordered_set<std::string> split_words(const char* data) {
    std::unordered_set<std::string> out;
    std::istringstream in(data);
    std::string w;
    while (in >> w) out.insert(w);
    return out;
}

void fill_from_file(const std::string& path, std::unordered_set<std::string>& target,
                    const char* what) {
    std::ifstream in(path);
    if (!in) throw input_error(std::string("cannot open ") + what + " file: " + path);
    target.clear();
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string w;
        if (!(ls >> w) || w[0] == '#') continue;
        target.insert(fold_case(w));
    }
}

Lexicons build_defaults() {
    Lexicons lex;
    lex.abbreviations = split_words(kAbbreviations);
    lex.stop_words = split_words(kStopWords);
    lex.connectives = split_words(kConnectives);
    lex.first_person = split_words(kFirstPerson);
    lex.demonstratives = split_words(kDemonstratives);
    lex.frequent_words = split_words(kFrequentWords);

    std::istringstream in(kClosedClass);
    std::string word, tag;
    while (in >> word >> tag) {
        if (auto pos = upos_from_string(tag)) {
            lex.closed_class.emplace(word, *pos);
            if (*pos == UPos::PRON) lex.pronouns.insert(word);
        }
    }
    return lex;
}

} // namespace

const Lexicons& Lexicons::defaults() {
    static const Lexicons lex = build_defaults();
    return lex;
}

void Lexicons::load_abbreviations(const std::string& path) {
    fill_from_file(path, abbreviations, "abbreviation");
}

void Lexicons::load_stop_words(const std::string& path) {
    fill_from_file(path, stop_words, "stop-word");
}

void Lexicons::load_frequent_words(const std::string& path) {
    fill_from_file(path, frequent_words, "vocabulary");
}

void Lexicons::load_closed_class(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open closed-class lexicon file: " + path);
    closed_class.clear();
    pronouns.clear();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string word, tag;
        if (!(ls >> word) || word[0] == '#') continue;
        if (!(ls >> tag)) {
            throw input_error("closed-class lexicon line " + std::to_string(line_no) +
                              ": expected `word TAG`");
        }
        auto pos = upos_from_string(tag);
        if (!pos) {
            throw input_error("closed-class lexicon line " + std::to_string(line_no) +
                              ": unknown UPOS tag `" + tag + "`");
        }
        const std::string folded = fold_case(word);
        closed_class.emplace(folded, *pos);
        if (*pos == UPos::PRON) pronouns.insert(folded);
    }
}

} // namespace sdml
