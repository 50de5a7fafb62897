package toy.parsers;

/**
 * Incremental parser producing a tree of untyped nodes.
 */
public abstract class NodeParser {

    protected int position;

    /**
     * Parses the given input into a node tree.
     *
     * @param input the complete document text
     */
    public abstract Object parse(String input);

    /**
     * Resets the parser to its initial state.
     */
    public void reset() {
        position = 0;
    }

    /** Returns the current state of the parser. */
    public String state() {
        return "at " + position;
    }

    /** Returns the next token without consuming it. */
    public String peek() {
        return null;
    }
}
