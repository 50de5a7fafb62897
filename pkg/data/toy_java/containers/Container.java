package toy.containers;

/**
 * A mutable collection of elements with a fixed growth policy.
 */
public abstract class Container {

    /**
     * Returns the number of stored elements in the container.
     */
    public abstract int size();

    /**
     * Removes every element from the container.
     */
    public abstract void clear();

    /**
     * Formats a short summary of the container state.
     *
     * @return a single line of text
     */
    public String summary() {
        return "n=" + size();
    }

    /** Checks whether the container holds no elements. */
    public boolean isEmpty() {
        return size() == 0;
    }
}
