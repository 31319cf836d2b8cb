"""From a MediaWiki XML export to length-filtered sentence records.

Run:  python demos/dump_ingestion.py
"""

# %%
import io
from xml.sax.saxutils import escape

from neardup import PipelineParams, filter_articles, parse_mediawiki_dump, strip_markup
from neardup.corpus import chunk_sentences, prepare

body = (
    "'''Anaxyrus''' is a genus of [[toad]]s.{{Infobox|size=small}} "
    "In dry areas it may only emerge from its burrow for a few weeks when conditions are right "
    "and usually at night.<ref>Stebbins 2003</ref> Short one. "
    "It feeds on [[beetle|small beetles]] and other insects that it finds near shallow water in the evening."
)
# markup inside <text> is entity-escaped in real exports
dump = f"""<mediawiki>
<page><title>Anaxyrus</title><ns>0</ns><id>1</id><revision><text>{escape(body)}</text></revision></page>
<page><title>Toad (disambiguation)</title><ns>0</ns><id>2</id><redirect title="Toad"/>
  <revision><text>#REDIRECT [[Toad]]</text></revision></page>
<page><title>Template:Infobox</title><ns>10</ns><id>3</id><revision><text>{{{{{{1}}}}}}</text></revision></page>
</mediawiki>"""

docs = list(parse_mediawiki_dump(io.BytesIO(dump.encode())))
print("pages parsed:", [(d.title, d.namespace, d.is_redirect) for d in docs])
articles = list(filter_articles(docs))
print("articles kept:", [d.title for d in articles])

# %%
print(strip_markup(articles[0].body))

# %%
# sentence indices count every sentence, so the short one leaves a gap
for rec in chunk_sentences(prepare(articles[0]), PipelineParams()):
    print(rec.sentence_id, rec.char_length, rec.text)
