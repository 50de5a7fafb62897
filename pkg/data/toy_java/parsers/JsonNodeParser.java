package toy.parsers;

/** Parses a small subset of json documents. */
public class JsonNodeParser extends NodeParser {

    private int marks;

    /**
     * Parses the given json input into a node tree of braces.
     */
    @Override
    public Object parse(String input) {
        int braces = 0;
        for (int i = 0; i < input.length(); i++) {
            char c = input.charAt(i);
            if (c == '{') {
                braces++;
            } else if (c == '}') {
                braces--;
            }
            position = i;
        }
        return braces == 0 ? new Object() : null;
    }

    /**
     * Resets the json parser to its initial state and clears the marks.
     */
    @Override
    public void reset() {
        position = 0;
        marks = 0;
    }

    /** Returns the current state of the json parser. */
    @Override
    public String state() {
        return "json at " + position + " marks=" + marks;
    }

    /** Returns the next café token without consuming it. */
    @Override
    public String peek() {
        return null;
    }
}
