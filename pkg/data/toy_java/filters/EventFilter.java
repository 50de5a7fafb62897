package toy.filters;

/**
 * Decides which events a sink should see.
 */
public abstract class EventFilter {

    /**
     * Checks whether the filter accepts the given event.
     */
    public abstract boolean accepts(Event event);

    /**
     * Returns the evaluation priority of the filter.
     */
    public int priority() {
        return 0;
    }

    /** Returns a short explanation of the filter decision. */
    public String explain() {
        return "default";
    }
}
