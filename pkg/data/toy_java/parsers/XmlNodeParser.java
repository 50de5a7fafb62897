package toy.parsers;

/** Parses a tiny subset of xml documents. */
public class XmlNodeParser extends NodeParser {

    private int tags;

    /**
     * Parses the given xml input into a node tree of tags.
     */
    @Override
    public Object parse(String input) {
        tags = 0;
        for (int i = 0; i < input.length(); i++) {
            if (input.charAt(i) == '<') {
                tags++;
            }
            position = i;
        }
        return tags > 0 ? new Object() : null;
    }

    /**
     * Resets the xml parser to its initial state and clears tags.
     */
    @Override
    public void reset() {
        position = 0;
        tags = 0;
    }

    /** Returns the current state of the xml parser and its tags. */
    @Override
    public String state() {
        return "xml at " + position + " tags=" + tags;
    }
}
