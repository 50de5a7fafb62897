package toy.containers;

/**
 * A last-in first-out container with a hard capacity limit.
 */
public class BoundedStack extends Container {

    private final Object[] slots;
    private int top;

    public BoundedStack(int limit) {
        this.slots = new Object[limit];
    }

    /**
     * Returns the current number of stored elements in the bounded container.
     */
    @Override
    public int size() {
        int current = top;
        return current;
    }

    /**
     * Removes every element from the bounded container and resets the top.
     */
    @Override
    public void clear() {
        while (top > 0) {
            top--;
            slots[top] = null;
        }
    }

    /**
     * Formats a short summary of the bounded container state and depth.
     */
    @Override
    public String summary() {
        int depth = top;
        return "depth=" + depth + "/" + slots.length;
    }

    /** Checks whether the container holds no elements. */
    @Override
    public boolean isEmpty() {
        return top == 0;
    }

    public void push(Object value) {
        slots[top] = value;
        top++;
    }
}
