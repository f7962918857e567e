class Box {
public:
  int size;
  int used;
};
